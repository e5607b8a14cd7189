//! Graph topologies, canonical edges and dyadic block geometry.
//!
//! Three topologies are supported: the infinite lattice `Z^d`, the discrete
//! torus `Λ_L = (Z/LZ)^d` and the complete graph `K_n`. Vertices of `K_n`
//! are represented as one-dimensional sites holding the vertex index.
//!
//! Distances follow one convention throughout the crate: block neighborhoods
//! use the L∞ distance ([`BLOCK_NORM`]) and displacement statistics use the
//! Euclidean norm ([`DISPLACEMENT_NORM`]).

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Norm used for block neighborhoods `N(B, x)`.
pub const BLOCK_NORM: &str = "linf";
/// Norm used for displacements, proximity and interaction radii.
pub const DISPLACEMENT_NORM: &str = "l2";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("dimension mismatch: topology has dimension {expected}, site has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("site {0} is not a vertex of the topology")]
    NotAVertex(Site),
    #[error("sites {0} and {1} are not adjacent")]
    NotAdjacent(Site, Site),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
}

/// A lattice point (or a `K_n` vertex index stored as a 1-d site).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(SmallVec<[i64; 5]>);

impl Site {
    pub fn new(coords: &[i64]) -> Self {
        Site(SmallVec::from_slice(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Site(SmallVec::from_elem(0, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    /// Componentwise sum. Panics in debug builds on overflow.
    pub fn offset_by(&self, delta: &[i64]) -> Site {
        debug_assert_eq!(self.dim(), delta.len());
        Site(self.0.iter().zip(delta).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference `self - other`.
    pub fn delta(&self, other: &Site) -> SmallVec<[i64; 5]> {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect()
    }

    /// Squared Euclidean distance.
    pub fn dist2(&self, other: &Site) -> i64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// L∞ distance.
    pub fn dist_inf(&self, other: &Site) -> i64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }
}

impl Deref for Site {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for Site {
    fn from(v: Vec<i64>) -> Self {
        Site(SmallVec::from_vec(v))
    }
}

/// An undirected edge in canonical form.
///
/// Lattice and torus edges are stored as `base -- base + e_axis` (the torus
/// endpoint wrapped). Complete-graph edges are stored as a sorted pair.
/// The derived ordering is the tie-break order for simultaneous rings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Edge {
    Lattice { base: Site, axis: u32 },
    Pair { pair: [u32; 2] },
}

impl Edge {
    pub fn pair(a: u32, b: u32) -> Edge {
        Edge::Pair {
            pair: [a.min(b), a.max(b)],
        }
    }
}

/// A dyadic block `corner + [0, 2^level)^d` with `corner ∈ 2^level Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockId {
    pub level: u32,
    pub corner: Site,
}

impl BlockId {
    pub fn side(&self) -> i64 {
        1i64 << self.level
    }

    pub fn contains(&self, site: &Site) -> bool {
        let side = self.side();
        site.iter()
            .zip(self.corner.iter())
            .all(|(&x, &c)| x >= c && x < c + side)
    }

    /// L∞ distance from `site` to the nearest point of the block.
    pub fn distance_inf(&self, site: &Site) -> i64 {
        let hi = self.side() - 1;
        site.iter()
            .zip(self.corner.iter())
            .map(|(&x, &c)| (c - x).max(x - (c + hi)).max(0))
            .max()
            .unwrap_or(0)
    }
}

/// The block of `ℬ_level` containing `site`. Floor semantics for negative
/// coordinates.
pub fn block_of(site: &Site, level: u32) -> BlockId {
    debug_assert!((1..62).contains(&level));
    let corner = site.iter().map(|&x| (x >> level) << level).collect();
    BlockId {
        level,
        corner: Site(corner),
    }
}

/// Whether `site ∈ N(B, x) = {u : d(u, B) ≤ x}` under the L∞ distance.
pub fn in_neighborhood(site: &Site, block: &BlockId, x: i64) -> bool {
    block.distance_inf(site) <= x
}

/// Whether `site` lies in the centered box `center + [-2^(level-1), 2^(level-1))^d`.
pub fn in_centered_box(site: &Site, center: &Site, level: u32) -> bool {
    let h = 1i64 << (level - 1);
    site.iter().zip(center.iter()).all(|(&x, &c)| x >= c - h && x < c + h)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Topology {
    /// The infinite lattice `Z^d`.
    Lattice { dim: usize },
    /// The torus with side `side` in every axis; coordinates live in `[0, side)`.
    Torus { dim: usize, side: i64 },
    /// The complete graph on `n` vertices.
    Complete { n: usize },
}

impl Topology {
    pub fn lattice(dim: usize) -> Result<Self, GraphError> {
        if dim == 0 {
            return Err(GraphError::InvalidTopology("dimension must be ≥ 1".into()));
        }
        Ok(Topology::Lattice { dim })
    }

    pub fn torus(dim: usize, side: i64) -> Result<Self, GraphError> {
        if dim == 0 {
            return Err(GraphError::InvalidTopology("dimension must be ≥ 1".into()));
        }
        // side 2 would make the two axis neighbors coincide (a multigraph)
        if side < 3 {
            return Err(GraphError::InvalidTopology("torus side must be ≥ 3".into()));
        }
        Ok(Topology::Torus { dim, side })
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        if n < 2 || n > u32::MAX as usize {
            return Err(GraphError::InvalidTopology(
                "complete graph needs 2 ≤ n < 2^32 vertices".into(),
            ));
        }
        Ok(Topology::Complete { n })
    }

    /// Dimension of the site representation (1 for `K_n`).
    pub fn dim(&self) -> usize {
        match *self {
            Topology::Lattice { dim } | Topology::Torus { dim, .. } => dim,
            Topology::Complete { .. } => 1,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Topology::Lattice { dim } | Topology::Torus { dim, .. } => 2 * dim,
            Topology::Complete { n } => n - 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Topology::Lattice { .. })
    }

    pub fn origin(&self) -> Site {
        Site::origin(self.dim())
    }

    /// Checks that `site` is a vertex of this topology.
    pub fn validate(&self, site: &Site) -> Result<(), GraphError> {
        if site.dim() != self.dim() {
            return Err(GraphError::DimensionMismatch {
                expected: self.dim(),
                got: site.dim(),
            });
        }
        let ok = match *self {
            Topology::Lattice { .. } => true,
            Topology::Torus { side, .. } => site.iter().all(|&x| (0..side).contains(&x)),
            Topology::Complete { n } => (0..n as i64).contains(&site[0]),
        };
        if ok {
            Ok(())
        } else {
            Err(GraphError::NotAVertex(site.clone()))
        }
    }

    /// Neighbor of `site` in direction `dir ∈ [0, degree)`.
    ///
    /// For lattice topologies direction `2i` is `-e_i` and `2i + 1` is `+e_i`.
    /// For `K_n` the directions enumerate the other vertices in increasing order.
    pub fn step(&self, site: &Site, dir: usize) -> Site {
        match *self {
            Topology::Lattice { .. } => {
                let mut s = site.clone();
                let c = &mut s.coords_mut()[dir / 2];
                *c += if dir.is_multiple_of(2) { -1 } else { 1 };
                s
            }
            Topology::Torus { side, .. } => {
                let mut s = site.clone();
                let c = &mut s.coords_mut()[dir / 2];
                *c = (*c + if dir.is_multiple_of(2) { side - 1 } else { 1 }) % side;
                s
            }
            Topology::Complete { .. } => {
                let v = site[0];
                let w = if (dir as i64) < v { dir as i64 } else { dir as i64 + 1 };
                Site::new(&[w])
            }
        }
    }

    /// The canonical edge joining `site` and `step(site, dir)`.
    pub fn edge_at(&self, site: &Site, dir: usize) -> Edge {
        match *self {
            Topology::Lattice { .. } | Topology::Torus { .. } => {
                let axis = (dir / 2) as u32;
                let base = if dir % 2 == 1 {
                    site.clone()
                } else {
                    self.step(site, dir)
                };
                Edge::Lattice { base, axis }
            }
            Topology::Complete { .. } => {
                let w = self.step(site, dir);
                Edge::pair(site[0] as u32, w[0] as u32)
            }
        }
    }

    /// Other endpoint of `edge` seen from `site`.
    pub fn across(&self, edge: &Edge, site: &Site) -> Site {
        match edge {
            Edge::Lattice { base, axis } => {
                if base == site {
                    self.step(site, 2 * *axis as usize + 1)
                } else {
                    base.clone()
                }
            }
            Edge::Pair { pair } => {
                let other = if pair[0] as i64 == site[0] { pair[1] } else { pair[0] };
                Site::new(&[other as i64])
            }
        }
    }

    /// All neighbors of `site` in direction order.
    pub fn neighbors(&self, site: &Site) -> Result<Vec<Site>, GraphError> {
        self.validate(site)?;
        Ok((0..self.degree()).map(|d| self.step(site, d)).collect())
    }

    /// Canonical edge between two adjacent vertices, independent of argument order.
    pub fn canonical_edge(&self, u: &Site, v: &Site) -> Result<Edge, GraphError> {
        self.validate(u)?;
        self.validate(v)?;
        (0..self.degree())
            .find(|&d| &self.step(u, d) == v)
            .map(|d| self.edge_at(u, d))
            .ok_or_else(|| GraphError::NotAdjacent(u.clone(), v.clone()))
    }

    /// Number of vertices of a finite topology.
    pub fn vertex_count(&self) -> Option<usize> {
        match *self {
            Topology::Lattice { .. } => None,
            Topology::Torus { dim, side } => Some((side as usize).pow(dim as u32)),
            Topology::Complete { n } => Some(n),
        }
    }

    /// Index of a vertex in a finite topology (row-major, axis 0 fastest).
    pub fn index_of(&self, site: &Site) -> Option<usize> {
        match *self {
            Topology::Lattice { .. } => None,
            Topology::Torus { side, .. } => {
                let mut idx = 0usize;
                for &c in site.iter().rev() {
                    idx = idx * side as usize + c as usize;
                }
                Some(idx)
            }
            Topology::Complete { .. } => Some(site[0] as usize),
        }
    }

    /// Vertex with the given index; inverse of [`Topology::index_of`].
    pub fn vertex(&self, mut index: usize) -> Option<Site> {
        match *self {
            Topology::Lattice { .. } => None,
            Topology::Torus { dim, side } => {
                let mut coords = SmallVec::with_capacity(dim);
                for _ in 0..dim {
                    coords.push((index % side as usize) as i64);
                    index /= side as usize;
                }
                Some(Site(coords))
            }
            Topology::Complete { .. } => Some(Site::new(&[index as i64])),
        }
    }

    /// All edges of a finite topology in canonical (sorted) order.
    pub fn edges(&self) -> Option<Vec<Edge>> {
        let n = self.vertex_count()?;
        let mut edges = Vec::new();
        match *self {
            Topology::Torus { dim, .. } => {
                for i in 0..n {
                    let v = self.vertex(i).expect("finite");
                    for axis in 0..dim as u32 {
                        edges.push(Edge::Lattice { base: v.clone(), axis });
                    }
                }
            }
            Topology::Complete { n } => {
                for a in 0..n as u32 {
                    for b in a + 1..n as u32 {
                        edges.push(Edge::pair(a, b));
                    }
                }
            }
            Topology::Lattice { .. } => unreachable!(),
        }
        edges.sort();
        Some(edges)
    }

    /// Endpoints of a canonical edge.
    pub fn endpoints(&self, edge: &Edge) -> (Site, Site) {
        match edge {
            Edge::Lattice { base, axis } => (base.clone(), self.step(base, 2 * *axis as usize + 1)),
            Edge::Pair { pair } => (Site::new(&[pair[0] as i64]), Site::new(&[pair[1] as i64])),
        }
    }
}
