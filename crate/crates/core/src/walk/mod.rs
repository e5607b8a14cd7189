//! The cyclic time random walk.
//!
//! Two constructions of the same law are provided:
//!
//! * [`simulate_cyclic_walk`] exposes the ring schedules of a [`ClockStore`]
//!   edge by edge, so the walk is a deterministic function of the clocks and
//!   agrees exactly with the interchange permutation;
//! * [`simulate_driven_walk`] follows an independent rate-`2d` simple random
//!   walk, suppressing jumps into the history and forcing jumps when the
//!   history jumps into the walk. It needs no clocks and is the fast path used
//!   by the estimators.
//!
//! [`simulate_regenerated_walk`] restarts an independent walk every time the
//! cycle closes, and [`concatenate`] glues trajectories end to end.
//!
//! [`ClockStore`]: crate::clocks::ClockStore

mod concat;
mod driven;
mod exposure;
mod regenerated;
mod time;
mod trajectory;

use thiserror::Error;

use crate::graph::GraphError;

pub use concat::concatenate;
pub use driven::{simulate_driven_live, simulate_driven_walk, DriverPath, LiveDriver};
pub use exposure::{simulate_cyclic_walk, simulate_cyclic_walk_from};
pub use regenerated::{simulate_regenerated_driven, simulate_regenerated_walk};
pub use time::CyclicTime;
pub use trajectory::{Jump, Piece, Trajectory};

/// Default cap on the number of periods used as the "infinite cycle" proxy.
pub const DEFAULT_K_MAX: u64 = 64;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("β must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("driver covers time up to {driver} but the walk needs {requested}")]
    DriverTooShort { driver: CyclicTime, requested: CyclicTime },
    #[error("invalid driver: {0}")]
    InvalidDriver(String),
    #[error("horizon {horizon} precedes the start time {origin}")]
    HorizonBeforeStart { horizon: CyclicTime, origin: CyclicTime },
    #[error("the driven construction needs a lattice or torus topology")]
    UnsupportedTopology,
    #[error("cannot concatenate an empty list of trajectories")]
    EmptyConcatenation,
    #[error("trajectories have different β ({0} vs {1})")]
    MismatchedBeta(f64, f64),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WalkOptions {
    /// Keep following the (now periodic) walk after the cycle closes.
    pub periodic_continuation: bool,
}

impl WalkOptions {
    pub fn periodic() -> Self {
        WalkOptions {
            periodic_continuation: true,
        }
    }
}

/// A simulated walk together with its first closure time.
#[derive(Clone, Debug)]
pub struct WalkOutcome {
    pub trajectory: Trajectory,
    /// First time `kβ` (after the start) at which the walk is back at its start.
    pub tau_reg: Option<CyclicTime>,
    pub closed: bool,
    /// Jumps taken at exactly the same time as the previous jump.
    pub tie_events: usize,
}

pub(crate) fn check_beta(beta: f64) -> Result<(), WalkError> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(WalkError::InvalidBeta(beta))
    }
}
