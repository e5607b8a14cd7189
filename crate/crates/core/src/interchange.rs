//! The interchange permutation `π_β` on finite graphs, its cycle structure
//! and Poisson–Dirichlet comparison statistics.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clocks::ClockStore;
use crate::graph::Topology;
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterchangeError {
    #[error("the interchange permutation needs a finite topology")]
    InfiniteTopology,
    #[error("image is not a bijection of 0..{0}")]
    NotABijection(usize),
}

/// A permutation of `0..V`; `image[v]` is the time-β position of the particle started at `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub fn from_image(image: Vec<usize>) -> Result<Self, InterchangeError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &x in &image {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(InterchangeError::NotABijection(n));
            }
        }
        Ok(Permutation { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, v: usize) -> usize {
        self.image[v]
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn sign(&self) -> i32 {
        let d = cycle_decomposition(self);
        let parity = d.cycles.iter().map(|c| c.len() - 1).sum::<usize>() % 2;
        if parity == 0 {
            1
        } else {
            -1
        }
    }
}

/// Result of [`build_permutation`].
#[derive(Clone, Debug)]
pub struct InterchangeRun {
    pub permutation: Permutation,
    pub ring_count: usize,
    /// Number of rings sharing their time with the previous ring (ordered by edge).
    pub tie_events: usize,
}

/// Composes the time-ordered transpositions of every edge of a finite graph.
pub fn build_permutation(topology: &Topology, store: &mut ClockStore) -> Result<InterchangeRun, InterchangeError> {
    let n = topology.vertex_count().ok_or(InterchangeError::InfiniteTopology)?;
    let edges = topology.edges().expect("finite topology");
    let mut rings: Vec<(f64, usize)> = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        for &t in store.schedule(e).times() {
            rings.push((t, i));
        }
    }
    // edges are enumerated in canonical order, so the index breaks ties
    rings.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let tie_events = rings.windows(2).filter(|w| w[0].0 == w[1].0).count();

    let endpoints: Vec<(usize, usize)> = edges
        .iter()
        .map(|e| {
            let (u, v) = topology.endpoints(e);
            (
                topology.index_of(&u).expect("finite"),
                topology.index_of(&v).expect("finite"),
            )
        })
        .collect();
    let mut occupant: Vec<usize> = (0..n).collect();
    for &(_, i) in &rings {
        let (u, v) = endpoints[i];
        occupant.swap(u, v);
    }
    let mut image = vec![0; n];
    for (site, &particle) in occupant.iter().enumerate() {
        image[particle] = site;
    }
    Ok(InterchangeRun {
        permutation: Permutation { image },
        ring_count: rings.len(),
        tie_events,
    })
}

/// The composition of `count` uniformly random transpositions of `0..n`
/// (the discrete-time interchange process on `K_n`).
pub fn random_transpositions(n: usize, count: usize, seed: u64) -> Permutation {
    let mut rng = rng::stream(seed, [tag::TRANSPOSITIONS, n as u64, count as u64]);
    let mut occupant: Vec<usize> = (0..n).collect();
    if n >= 2 {
        for _ in 0..count {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            occupant.swap(a, b);
        }
    }
    let mut image = vec![0; n];
    for (site, &particle) in occupant.iter().enumerate() {
        image[particle] = site;
    }
    Permutation { image }
}

/// Cycles of a permutation, longest first, ties broken by smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleDecomposition {
    pub cycles: Vec<Vec<usize>>,
}

impl CycleDecomposition {
    pub fn from_image(image: &[usize]) -> Result<Self, InterchangeError> {
        Ok(cycle_decomposition(&Permutation::from_image(image.to_vec())?))
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    pub fn count(&self) -> usize {
        self.cycles.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }
}

pub fn cycle_decomposition(perm: &Permutation) -> CycleDecomposition {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            cycle.push(v);
            v = perm.apply(v);
        }
        cycles.push(cycle);
    }
    // each cycle already starts at its smallest element
    cycles.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    CycleDecomposition { cycles }
}

/// Default mesoscopic cutoff `⌈V^(2/3)⌉`.
pub fn default_cutoff(vertex_count: usize) -> usize {
    ((vertex_count as f64).powf(2.0 / 3.0).ceil() as usize).max(1)
}

/// Macroscopic-mass summary of one cycle decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdReport {
    pub vertex_count: usize,
    pub cutoff: usize,
    pub cycle_count: usize,
    /// Fraction of vertices in cycles of length ≥ cutoff.
    pub alpha_hat: f64,
    /// Up to ten largest lengths divided by `alpha_hat · V`; absent when `alpha_hat = 0`.
    pub top_normalized: Option<Vec<f64>>,
    pub no_macroscopic_mass: bool,
}

impl PdReport {
    pub fn largest_normalized(&self) -> Option<f64> {
        self.top_normalized.as_ref().and_then(|v| v.first().copied())
    }
}

pub fn pd_statistics(decomp: &CycleDecomposition, cutoff: usize) -> PdReport {
    let v = decomp.vertex_count();
    let macro_mass: usize = decomp.cycles.iter().map(Vec::len).filter(|&l| l >= cutoff).sum();
    let alpha_hat = if v == 0 { 0.0 } else { macro_mass as f64 / v as f64 };
    let top_normalized = (alpha_hat > 0.0).then(|| {
        decomp
            .cycles
            .iter()
            .take(10)
            .map(|c| c.len() as f64 / (alpha_hat * v as f64))
            .collect()
    });
    PdReport {
        vertex_count: v,
        cutoff,
        cycle_count: decomp.count(),
        alpha_hat,
        top_normalized,
        no_macroscopic_mass: alpha_hat == 0.0,
    }
}
