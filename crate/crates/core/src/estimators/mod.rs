//! Monte Carlo estimators for the statistics the multiscale argument bounds.
//!
//! Every ensemble runs replica `i` on the keyed stream `(seed, REPLICA, i)`
//! and aggregates in replica order, so results are bit-identical for any
//! thread count.

mod escape;
mod pd;
mod percolation;
mod walks;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clocks::{ClockError, ClockStore};
use crate::diagnostics::DiagnosticsError;
use crate::graph::{GraphError, Site, Topology, BLOCK_NORM, DISPLACEMENT_NORM};
use crate::rng::{self, tag, RNG_NAME};
use crate::stats::wilson_interval;
use crate::walk::{
    simulate_cyclic_walk, simulate_driven_live, simulate_regenerated_driven, CyclicTime, Trajectory, WalkError,
    WalkOptions,
};

pub use escape::{escape_probability, pair_replica, EscapeEstimate, MIN_RESAMPLES};
pub use pd::{interchange_replica, pd_ensemble, InterchangeRow, PdEnsemble};
pub use percolation::{percolation_cluster, percolation_cluster_in, percolation_replica, Cluster, PercolationRow};
pub use walks::{
    closure_probability, closure_sweep, closure_times, displacement_moments, relaxed_prevalence, tau_fast_tail,
    transition_probability_sup, ClosureSweep, DisplacementMoments, RelaxedPrevalence, TauFastTail, TransitionSup,
};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Normal,
    Wilson,
}

/// A point estimate with a 95% confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub ci95: (f64, f64),
    pub method: CiMethod,
}

impl Estimate {
    /// Sample mean with a normal interval.
    pub fn mean(xs: &[f64]) -> Estimate {
        let (value, stderr) = crate::stats::mean_stderr(xs);
        let stderr = if stderr.is_finite() { stderr } else { 0.0 };
        Estimate {
            value,
            stderr,
            samples: xs.len() as u64,
            ci95: (value - Z95 * stderr, value + Z95 * stderr),
            method: CiMethod::Normal,
        }
    }

    /// Binomial proportion; Wilson interval when fewer than 10 successes or failures.
    pub fn proportion(successes: u64, n: u64) -> Estimate {
        let p = if n == 0 { 0.0 } else { successes as f64 / n as f64 };
        let stderr = if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() };
        let nf = n as f64;
        if nf * p < 10.0 || nf * (1.0 - p) < 10.0 {
            Estimate {
                value: p,
                stderr,
                samples: n,
                ci95: wilson_interval(successes, n, Z95),
                method: CiMethod::Wilson,
            }
        } else {
            Estimate {
                value: p,
                stderr,
                samples: n,
                ci95: ((p - Z95 * stderr).max(0.0), (p + Z95 * stderr).min(1.0)),
                method: CiMethod::Normal,
            }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci95.0 <= x && x <= self.ci95.1
    }
}

/// Reproducibility metadata attached to every estimator output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub rng: String,
    pub block_norm: String,
    pub displacement_norm: String,
    pub ci_method: String,
    pub k_max: Option<u64>,
    pub cap: Option<usize>,
}

impl Metadata {
    pub fn new(seed: u64) -> Self {
        Metadata {
            seed,
            rng: RNG_NAME.to_string(),
            block_norm: BLOCK_NORM.to_string(),
            displacement_norm: DISPLACEMENT_NORM.to_string(),
            ci_method: "normal, Wilson below 10 successes or failures".to_string(),
            k_max: None,
            cap: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Clock exposure (exact coupling with the interchange process).
    Exposure,
    /// The driven random walk (no clocks).
    Driven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuation {
    /// Stop at the first closure.
    Stop,
    /// Keep following the closed cycle.
    Periodic,
    /// Restart an independent walk at every closure.
    Regenerate,
}

/// An ensemble of independent walks started at the origin at time 0.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub topology: Topology,
    pub beta: f64,
    pub horizon: CyclicTime,
    pub samples: usize,
    pub seed: u64,
    pub construction: Construction,
    pub continuation: Continuation,
}

impl Ensemble {
    /// Regenerated driven walks on `Z^d` up to real time `t`.
    pub fn lattice(d: usize, beta: f64, t: f64, samples: usize, seed: u64) -> Result<Self, EstimatorError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(EstimatorError::InvalidParameter(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        crate::walk::check_beta(beta)?;
        Ok(Ensemble {
            topology: Topology::lattice(d)?,
            beta,
            horizon: CyclicTime::from_real(t, beta),
            samples,
            seed,
            construction: Construction::Driven,
            continuation: Continuation::Regenerate,
        })
    }

    /// Clock seed of replica `i` under the exposure construction (of its
    /// first walk, when regenerating).
    pub fn clock_seed(&self, i: usize) -> u64 {
        let seed = rng::derive_seed(self.seed, [tag::REPLICA, i as u64]);
        match self.continuation {
            Continuation::Regenerate => rng::derive_seed(seed, [tag::REGENERATION, 0]),
            _ => seed,
        }
    }

    /// The `i`-th walk of the ensemble.
    pub fn replica(&self, i: usize) -> Result<Trajectory, EstimatorError> {
        let start = self.topology.origin();
        let opts = match self.continuation {
            Continuation::Periodic => WalkOptions::periodic(),
            _ => WalkOptions::default(),
        };
        let traj = match (self.construction, self.continuation) {
            (Construction::Exposure, Continuation::Regenerate) => {
                let seed = rng::derive_seed(self.seed, [tag::REPLICA, i as u64]);
                crate::walk::simulate_regenerated_walk(&self.topology, self.beta, &start, self.horizon, seed)?
            }
            (Construction::Exposure, _) => {
                let mut store = ClockStore::new(self.beta, self.clock_seed(i))?;
                simulate_cyclic_walk(&self.topology, &start, self.horizon, &mut store, opts)?.trajectory
            }
            (Construction::Driven, Continuation::Regenerate) => {
                let mut r = replica_rng(self.seed, i);
                simulate_regenerated_driven(&self.topology, self.beta, &start, self.horizon, &mut r)?
            }
            (Construction::Driven, _) => {
                let mut r = replica_rng(self.seed, i);
                simulate_driven_live(&self.topology, &start, self.beta, self.horizon, &mut r, opts)?.trajectory
            }
        };
        Ok(traj)
    }

    /// `f` applied to every replica, in replica order.
    pub fn map<T: Send>(&self, f: impl Fn(usize, Trajectory) -> T + Sync + Send) -> Result<Vec<T>, EstimatorError> {
        (0..self.samples)
            .into_par_iter()
            .map(|i| self.replica(i).map(|traj| f(i, traj)))
            .collect()
    }

    /// Endpoint of every replica, in replica order.
    pub fn endpoints(&self) -> Result<Vec<Site>, EstimatorError> {
        self.map(|_, traj| traj.end_position().clone())
    }

    /// Endpoint counts by vertex index (finite topologies only).
    pub fn endpoint_law(&self) -> Result<Vec<u64>, EstimatorError> {
        let n = self
            .topology
            .vertex_count()
            .ok_or_else(|| EstimatorError::InvalidParameter("endpoint law needs a finite topology".into()))?;
        let mut counts = vec![0u64; n];
        for site in self.endpoints()? {
            counts[self.topology.index_of(&site).expect("walk stays on the graph")] += 1;
        }
        Ok(counts)
    }
}

pub(crate) fn replica_rng(seed: u64, i: usize) -> ChaCha8Rng {
    rng::stream(seed, [tag::REPLICA, i as u64])
}

pub(crate) fn check_samples(samples: usize) -> Result<(), EstimatorError> {
    if samples == 0 {
        Err(EstimatorError::InvalidParameter("samples must be positive".into()))
    } else {
        Ok(())
    }
}
