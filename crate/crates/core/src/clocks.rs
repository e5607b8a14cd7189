//! Lazily sampled, memoized Poisson ring schedules.
//!
//! A [`ClockStore`] is the only source of randomness for the interchange
//! process and the exposure construction of the cyclic walk. The schedule of
//! an edge is a pure function of `(seed, edge, epoch)`, so the order in which
//! edges are queried never changes any result.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Edge;
use crate::rng::{self, tag};

#[derive(Debug, Error)]
pub enum ClockError {
    #[error("β must be finite and non-negative, got {0}")]
    InvalidBeta(f64),
    #[error("ring times must be strictly increasing and lie in (0, β): {0:?}")]
    InvalidTimes(Vec<f64>),
    #[error("malformed schedule dump at line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Sorted ring offsets of one edge within a period `[0, β)`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct RingSchedule {
    times: Vec<f64>,
}

/// Result of [`RingSchedule::next_ring_after`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NextRing {
    /// The next ring at offset `time`; `wrapped` means it falls in the next period.
    Ring { time: f64, wrapped: bool },
    /// The edge never rings.
    Silent,
}

impl RingSchedule {
    pub fn new(beta: f64, times: Vec<f64>) -> Result<Self, ClockError> {
        let ok = times.iter().all(|&t| t > 0.0 && t < beta) && times.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(RingSchedule { times })
        } else {
            Err(ClockError::InvalidTimes(times))
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest ring strictly after offset `s`, wrapping into the next period.
    pub fn next_ring_after(&self, s: f64) -> NextRing {
        self.next_ring(s, false)
    }

    /// Like [`RingSchedule::next_ring_after`], optionally admitting a ring at exactly `s`.
    #[inline]
    pub(crate) fn next_ring(&self, s: f64, inclusive: bool) -> NextRing {
        if self.times.is_empty() {
            return NextRing::Silent;
        }
        let idx = if inclusive {
            self.times.partition_point(|&x| x < s)
        } else {
            self.times.partition_point(|&x| x <= s)
        };
        match self.times.get(idx) {
            Some(&time) => NextRing::Ring { time, wrapped: false },
            None => NextRing::Ring {
                time: self.times[0],
                wrapped: true,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    /// Schedules sampled from keyed streams.
    Random { seed: u64, epoch: u64 },
    /// Edges without an explicit schedule never ring.
    Silent,
}

/// Memoized per-edge ring schedules with optional frozen (conditioned) edges.
#[derive(Clone, Debug)]
pub struct ClockStore {
    beta: f64,
    source: Source,
    frozen: Arc<FxHashMap<Edge, Arc<RingSchedule>>>,
    memo: FxHashMap<Edge, Arc<RingSchedule>>,
    resamples: u64,
}

/// One line of a schedule dump.
#[derive(Serialize, Deserialize)]
struct DumpLine {
    edge: Edge,
    times: Vec<f64>,
}

impl ClockStore {
    /// A store drawing every schedule from the keyed stream of `seed`.
    pub fn new(beta: f64, seed: u64) -> Result<Self, ClockError> {
        check_beta(beta)?;
        Ok(ClockStore {
            beta,
            source: Source::Random { seed, epoch: 0 },
            frozen: Arc::default(),
            memo: FxHashMap::default(),
            resamples: 0,
        })
    }

    /// A store with explicit schedules; every other edge is silent.
    pub fn scripted(beta: f64, schedules: impl IntoIterator<Item = (Edge, Vec<f64>)>) -> Result<Self, ClockError> {
        check_beta(beta)?;
        let mut memo = FxHashMap::default();
        for (edge, mut times) in schedules {
            times.sort_by(f64::total_cmp);
            memo.insert(edge, Arc::new(RingSchedule::new(beta, times)?));
        }
        Ok(ClockStore {
            beta,
            source: Source::Silent,
            frozen: Arc::default(),
            memo,
            resamples: 0,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> Option<u64> {
        match self.source {
            Source::Random { seed, .. } => Some(seed),
            Source::Silent => None,
        }
    }

    /// Resample epoch (0 for a root store).
    pub fn epoch(&self) -> u64 {
        match self.source {
            Source::Random { epoch, .. } => epoch,
            Source::Silent => 0,
        }
    }

    /// Number of edges with a materialized schedule (frozen or memoized).
    pub fn materialized(&self) -> usize {
        self.frozen.len() + self.memo.len()
    }

    pub fn is_frozen(&self, edge: &Edge) -> bool {
        self.frozen.contains_key(edge)
    }

    /// The ring schedule of `edge`, sampled on first access.
    pub fn schedule(&mut self, edge: &Edge) -> Arc<RingSchedule> {
        if let Some(s) = self.frozen.get(edge) {
            return Arc::clone(s);
        }
        if let Some(s) = self.memo.get(edge) {
            return Arc::clone(s);
        }
        let sched = Arc::new(self.sample(edge));
        self.memo.insert(edge.clone(), Arc::clone(&sched));
        sched
    }

    /// Number of rings of `edge` within one period.
    pub fn ring_count(&mut self, edge: &Edge) -> usize {
        self.schedule(edge).len()
    }

    fn sample(&self, edge: &Edge) -> RingSchedule {
        let Source::Random { seed, epoch } = self.source else {
            return RingSchedule::default();
        };
        if self.beta == 0.0 {
            return RingSchedule::default();
        }
        let mut rng = rng::stream(seed, edge_labels(edge, epoch));
        let count = Poisson::new(self.beta).expect("β > 0").sample(&mut rng) as usize;
        'draw: loop {
            let mut times: Vec<f64> = (0..count)
                .map(|_| loop {
                    let t = rng.random::<f64>() * self.beta;
                    if t > 0.0 && t < self.beta {
                        break t;
                    }
                })
                .collect();
            times.sort_by(f64::total_cmp);
            if times.windows(2).any(|w| w[0] == w[1]) {
                continue 'draw;
            }
            return RingSchedule { times };
        }
    }

    /// A new store that keeps every schedule materialized so far and redraws
    /// all other edges from a fresh epoch. Successive calls give independent
    /// futures.
    pub fn resample_undiscovered(&mut self) -> ClockStore {
        self.resamples += 1;
        let mut frozen: FxHashMap<Edge, Arc<RingSchedule>> = (*self.frozen).clone();
        for (e, s) in &self.memo {
            frozen.insert(e.clone(), Arc::clone(s));
        }
        let source = match self.source {
            Source::Random { seed, epoch } => Source::Random {
                seed,
                epoch: rng::fold([tag::RESAMPLE, epoch, self.resamples]),
            },
            Source::Silent => Source::Silent,
        };
        ClockStore {
            beta: self.beta,
            source,
            frozen: Arc::new(frozen),
            memo: FxHashMap::default(),
            resamples: 0,
        }
    }

    /// Writes every materialized schedule as JSON lines `{edge, times}`, sorted by edge.
    pub fn dump_jsonl<W: Write>(&self, mut out: W) -> Result<(), ClockError> {
        let all: BTreeMap<&Edge, &Arc<RingSchedule>> = self.frozen.iter().chain(self.memo.iter()).collect();
        for (edge, sched) in all {
            let line = DumpLine {
                edge: edge.clone(),
                times: sched.times.clone(),
            };
            serde_json::to_writer(&mut out, &line).map_err(|e| ClockError::Io(e.into()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads a dump written by [`ClockStore::dump_jsonl`] into a scripted store.
    /// Lines holding a `{"metadata": ...}` header are skipped.
    pub fn load_jsonl<R: BufRead>(beta: f64, input: R) -> Result<ClockStore, ClockError> {
        let mut schedules = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with("{\"metadata\"") {
                continue;
            }
            let d: DumpLine =
                serde_json::from_str(&line).map_err(|source| ClockError::Parse { line: i + 1, source })?;
            schedules.push((d.edge, d.times));
        }
        ClockStore::scripted(beta, schedules)
    }
}

fn check_beta(beta: f64) -> Result<(), ClockError> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(ClockError::InvalidBeta(beta))
    }
}

fn edge_labels(edge: &Edge, epoch: u64) -> impl Iterator<Item = u64> + '_ {
    let (kind, coords, last): (u64, &[i64], u64) = match edge {
        Edge::Lattice { base, axis } => (base.dim() as u64, base.coords(), *axis as u64),
        Edge::Pair { pair } => (u64::MAX, &[], ((pair[0] as u64) << 32) | pair[1] as u64),
    };
    [tag::EDGE, epoch, kind]
        .into_iter()
        .chain(coords.iter().map(|&c| c as u64))
        .chain(std::iter::once(last))
}
