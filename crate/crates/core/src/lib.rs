//! Exact Monte Carlo simulation of the interchange process (random stirring)
//! and of the cyclic time random walk obtained by following one particle
//! through a periodically repeated ring pattern.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`]: lattice, torus and complete-graph topologies, dyadic blocks;
//! * [`clocks`]: lazily sampled per-edge Poisson ring schedules;
//! * [`interchange`]: the permutation `π_β` and its cycle structure;
//! * [`walk`]: the cyclic walk (exposure and driven constructions),
//!   regeneration and concatenation;
//! * [`diagnostics`]: path statistics (history interaction, heavy blocks,
//!   relaxed times, pair proximity);
//! * [`estimators`]: ensemble estimates with confidence intervals;
//! * [`stats`]: goodness-of-fit helpers and the GEM(1) reference sampler.

pub mod clocks;
pub mod diagnostics;
pub mod estimators;
pub mod graph;
pub mod interchange;
pub mod rng;
pub mod stats;
pub mod walk;

pub use clocks::{ClockStore, RingSchedule};
pub use graph::{BlockId, Edge, Site, Topology};
pub use walk::{CyclicTime, Trajectory, WalkOutcome};
