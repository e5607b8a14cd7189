use serde::{Deserialize, Serialize};

use super::{
    heavy_blocks, interacts_with_past, relaxed_times, tau_fast, DiagnosticsConfig, HeavyReport, RelaxedReport,
};
use crate::walk::{CyclicTime, Trajectory};

/// All single-trajectory diagnostics, evaluated at the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub beta: f64,
    pub duration: f64,
    pub jumps: usize,
    pub regenerations: usize,
    pub interacts_at_horizon: bool,
    /// `(L, τ_fast(L))` for each requested `L`.
    pub tau_fast: Vec<(f64, Option<CyclicTime>)>,
    pub heavy: HeavyReport,
    pub relaxed: RelaxedReport,
}

pub fn diagnose(traj: &Trajectory, cfg: &DiagnosticsConfig, fast_levels: &[f64]) -> DiagnosticsReport {
    let h = traj.horizon();
    DiagnosticsReport {
        beta: traj.beta(),
        duration: traj.duration(),
        jumps: traj.jumps().len(),
        regenerations: traj.regen_count(h),
        interacts_at_horizon: interacts_with_past(traj, h),
        tau_fast: fast_levels.iter().map(|&l| (l, tau_fast(traj, l))).collect(),
        heavy: heavy_blocks(traj, h, cfg),
        relaxed: relaxed_times(traj, cfg),
    }
}

impl DiagnosticsReport {
    /// Column names of [`csv_record`](Self::csv_record) for the given `τ_fast` levels.
    pub fn csv_header(fast_levels: &[f64]) -> Vec<String> {
        let mut h: Vec<String> = [
            "jumps",
            "regenerations",
            "duration",
            "relaxed_measure",
            "relaxed_fraction",
            "relaxed_path",
            "heavy_blocks",
            "super_heavy_blocks",
            "max_heavy_level",
            "interacts_at_horizon",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(fast_levels.iter().map(|l| format!("tau_fast_{l}")));
        h
    }

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: Option<String>| x.unwrap_or_default();
        let mut r = vec![
            self.jumps.to_string(),
            self.regenerations.to_string(),
            self.duration.to_string(),
            self.relaxed.measure.to_string(),
            self.relaxed.fraction.to_string(),
            opt(self.relaxed.relaxed_path.map(|b| b.to_string())),
            self.heavy.entries.len().to_string(),
            self.heavy.entries.iter().filter(|e| e.super_heavy).count().to_string(),
            opt(self
                .heavy
                .entries
                .iter()
                .map(|e| e.block.level)
                .max()
                .map(|l| l.to_string())),
            self.interacts_at_horizon.to_string(),
        ];
        r.extend(
            self.tau_fast
                .iter()
                .map(|(_, t)| opt(t.map(|t| t.total(self.beta).to_string()))),
        );
        r
    }
}
