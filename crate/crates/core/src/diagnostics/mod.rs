//! Path statistics of cyclic walk trajectories.
//!
//! Every detector is a pure function of a [`Trajectory`]. Distances between
//! sites are Euclidean (`‖·‖₂`) and measured in lattice coordinates;
//! blocks are the half-open boxes of [`crate::graph`].
//!
//! Relaxedness is piecewise constant in time: it can only change at jump
//! times, at regeneration marks and at the moments a small block starts
//! counting as super heavy. [`relaxed_times`] evaluates it on exactly those
//! pieces, so the reported measure is exact.

mod blocks;
mod history;
mod proximity;
mod report;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::walk::{CyclicTime, Trajectory};

pub use blocks::{heavy_blocks, relaxed_times, HeavyEntry, HeavyReport, RelaxedReport};
pub use history::{interacts_with_past, tau_fast, tau_hit};
pub use proximity::{pair_proximity, PairProximity, ProximityParams};
pub use report::{diagnose, DiagnosticsReport};

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("trajectories have different β ({0} vs {1})")]
    MismatchedBeta(f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Thresholds for heavy blocks and relaxed times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub epsilon: f64,
    /// A large block of side `2^n` is heavy once it holds `heavy_base^n` visited sites.
    pub heavy_base: u64,
    pub super_heavy_base: u64,
    /// Blocks of side below this use the dwell-time rule (`β^{ε⁴}` by default).
    pub small_block_threshold: f64,
    /// Dwell time after which a visited small block is super heavy (`β^{ε³}`).
    pub small_block_window: f64,
}

impl DiagnosticsConfig {
    /// Default thresholds with `ε = 1/(200d)`.
    pub fn for_dimension(dim: usize, beta: f64) -> Self {
        Self::with_epsilon(1.0 / (200.0 * dim as f64), beta)
    }

    pub fn with_epsilon(epsilon: f64, beta: f64) -> Self {
        DiagnosticsConfig {
            epsilon,
            heavy_base: 5,
            super_heavy_base: 6,
            small_block_threshold: beta.powf(epsilon.powi(4)),
            small_block_window: beta.powf(epsilon.powi(3)),
        }
    }

    pub fn validate(&self) -> Result<(), DiagnosticsError> {
        let bad = |m: &str| Err(DiagnosticsError::InvalidParameter(m.into()));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if self.heavy_base < 2 || self.super_heavy_base < self.heavy_base {
            return bad("need 2 ≤ heavy_base ≤ super_heavy_base");
        }
        if !(self.small_block_threshold > 0.0 && self.small_block_window > 0.0) {
            return bad("small-block thresholds must be positive");
        }
        Ok(())
    }

    /// Required relaxed fraction `9/10 + 1/n` for a path of length in `(4^n, 4^{n+1}]`.
    pub fn relaxed_fraction(n: u32) -> f64 {
        0.9 + 1.0 / n as f64
    }

    /// Whether blocks of side `2^level` use the dwell-time rule.
    pub fn is_small_level(&self, level: u32) -> bool {
        ((1u64 << level) as f64) < self.small_block_threshold
    }

    /// Largest level using the dwell-time rule, if any.
    pub fn largest_small_level(&self) -> Option<u32> {
        (1..62).take_while(|&n| self.is_small_level(n)).last()
    }
}

/// `base^level`, saturating.
pub(crate) fn power(base: u64, level: u32) -> u64 {
    base.saturating_pow(level)
}

/// A signed time `kβ + s`; cyclic shifts may take it below zero.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stamp {
    pub k: i64,
    pub s: f64,
}

impl Stamp {
    pub fn shift(self, m: i64) -> Stamp {
        Stamp {
            k: self.k + m,
            s: self.s,
        }
    }

    pub fn time(self) -> CyclicTime {
        debug_assert!(self.k >= 0);
        CyclicTime::new(self.k as u64, self.s)
    }
}

impl From<CyclicTime> for Stamp {
    fn from(t: CyclicTime) -> Stamp {
        Stamp {
            k: t.period as i64,
            s: t.offset,
        }
    }
}

impl PartialEq for Stamp {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Stamp {}

impl PartialOrd for Stamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Stamp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k.cmp(&other.k).then_with(|| self.s.total_cmp(&other.s))
    }
}

/// Visits in `(from, to]` preceded by the position at `from`: the walk
/// reaches `site` at `time` and stays until the next visit.
pub(crate) fn visits(traj: &Trajectory, from: CyclicTime, to: CyclicTime) -> Vec<(CyclicTime, &crate::graph::Site)> {
    let mut out = vec![(from, traj.position_at(from))];
    let jumps = traj.jumps();
    let lo = jumps.partition_point(|j| j.time <= from);
    let hi = jumps.partition_point(|j| j.time <= to);
    out.extend(jumps[lo..hi].iter().map(|j| (j.time, &j.site)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_has_no_small_levels_at_desk_scale() {
        let cfg = DiagnosticsConfig::for_dimension(5, 64.0);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.largest_small_level(), None);
        assert!(cfg.small_block_threshold > 1.0 && cfg.small_block_threshold < 1.0001);
    }

    #[test]
    fn relaxed_fraction_decreases() {
        assert!(DiagnosticsConfig::relaxed_fraction(3) > DiagnosticsConfig::relaxed_fraction(4));
        assert!((DiagnosticsConfig::relaxed_fraction(10) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stamps_order_across_negative_periods() {
        let a = Stamp { k: -1, s: 0.9 };
        let b = Stamp { k: 0, s: 0.1 };
        assert!(a < b);
        assert_eq!(b.shift(-1).k, -1);
    }
}
