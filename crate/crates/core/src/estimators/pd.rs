use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_samples, Estimate, EstimatorError};
use crate::clocks::ClockStore;
use crate::graph::Topology;
use crate::interchange::{build_permutation, cycle_decomposition, pd_statistics, random_transpositions, PdReport};
use crate::rng::{self, tag};
use crate::stats::{gem_largest_samples, ks_p_value, ks_two_sample};

/// Cycle statistics of many compositions of random transpositions of `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdEnsemble {
    pub n: usize,
    pub transpositions: usize,
    pub cutoff: usize,
    /// Mean fraction of vertices in cycles of length at least `cutoff`.
    pub alpha: Estimate,
    /// Largest cycle over `alpha_hat · n` for every replica with macroscopic mass.
    pub largest_normalized: Vec<f64>,
}

impl PdEnsemble {
    /// Two-sample KS distance and p-value against `samples` GEM(1) largest parts.
    pub fn gem_ks(&self, samples: usize, seed: u64) -> Option<(f64, f64)> {
        if self.largest_normalized.is_empty() {
            return None;
        }
        let gem = gem_largest_samples(samples, seed);
        let d = ks_two_sample(&self.largest_normalized, &gem);
        Some((d, ks_p_value(d, self.largest_normalized.len(), gem.len())))
    }
}

pub fn pd_ensemble(
    n: usize,
    transpositions: usize,
    replicas: usize,
    cutoff: usize,
    seed: u64,
) -> Result<PdEnsemble, EstimatorError> {
    check_samples(replicas)?;
    let reports: Vec<PdReport> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let perm = random_transpositions(n, transpositions, rng::derive_seed(seed, [tag::REPLICA, i as u64]));
            pd_statistics(&cycle_decomposition(&perm), cutoff)
        })
        .collect();
    let alphas: Vec<f64> = reports.iter().map(|r| r.alpha_hat).collect();
    Ok(PdEnsemble {
        n,
        transpositions,
        cutoff,
        alpha: Estimate::mean(&alphas),
        largest_normalized: reports.iter().filter_map(PdReport::largest_normalized).collect(),
    })
}

/// One row of an interchange ensemble on a finite graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterchangeRow {
    pub replica: usize,
    pub vertex_count: usize,
    pub beta: f64,
    pub ring_count: usize,
    pub cycle_count: usize,
    pub top_lengths: Vec<usize>,
    pub alpha_hat: f64,
    pub tie_events: usize,
}

/// The permutation `π_β` of replica `i` and its cycle statistics.
pub fn interchange_replica(
    topology: &Topology,
    beta: f64,
    cutoff: usize,
    seed: u64,
    i: usize,
) -> Result<InterchangeRow, EstimatorError> {
    let mut store = ClockStore::new(beta, rng::derive_seed(seed, [tag::REPLICA, i as u64]))?;
    let run = build_permutation(topology, &mut store).map_err(|e| EstimatorError::InvalidParameter(e.to_string()))?;
    let decomp = cycle_decomposition(&run.permutation);
    let report = pd_statistics(&decomp, cutoff);
    Ok(InterchangeRow {
        replica: i,
        vertex_count: report.vertex_count,
        beta,
        ring_count: run.ring_count,
        cycle_count: report.cycle_count,
        top_lengths: decomp.lengths().into_iter().take(10).collect(),
        alpha_hat: report.alpha_hat,
        tie_events: run.tie_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn few_transpositions_leave_no_macroscopic_mass() {
        let e = pd_ensemble(400, 20, 50, 37, 1).unwrap();
        assert_eq!(e.alpha.value, 0.0);
        assert!(e.gem_ks(100, 1).is_none());
    }

    #[test]
    fn many_transpositions_produce_giant_cycles() {
        let e = pd_ensemble(200, 2000, 50, 24, 1).unwrap();
        assert!(e.alpha.value > 0.8, "{:?}", e.alpha);
        assert!(e.largest_normalized.iter().all(|&x| x > 0.0 && x <= 1.0));
        let (d, _) = e.gem_ks(5000, 3).unwrap();
        assert!(d < 0.3, "{d}");
    }

    #[test]
    fn interchange_rows_are_reproducible() {
        let topo = Topology::torus(2, 4).unwrap();
        let a = interchange_replica(&topo, 1.0, 3, 5, 2).unwrap();
        assert_eq!(a, interchange_replica(&topo, 1.0, 3, 5, 2).unwrap());
        assert_eq!(a.vertex_count, 16);
        assert!(a.top_lengths.iter().sum::<usize>() <= 16);
    }
}
