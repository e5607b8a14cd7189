use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_samples, Estimate, EstimatorError};
use crate::clocks::ClockStore;
use crate::diagnostics::{pair_proximity, PairProximity, ProximityParams};
use crate::graph::{Site, Topology};
use crate::rng::{self, tag};
use crate::walk::{
    simulate_cyclic_walk, simulate_cyclic_walk_from, simulate_regenerated_walk, CyclicTime, Trajectory, WalkOptions,
};

/// Fewer resamples than this give a uselessly wide interval.
pub const MIN_RESAMPLES: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeEstimate {
    pub estimate: Estimate,
    pub k: u32,
    /// Conditioning time (end of the prefix).
    pub t: CyclicTime,
    /// Continuation length `k³4^k`.
    pub span: f64,
    /// Displacement threshold `k·2^k`.
    pub threshold: f64,
    pub warning: Option<String>,
}

/// `P(|W(t + k³4^k) - W(t)| ≥ k·2^k | prefix)` by resampling every clock the
/// prefix did not expose.
///
/// `prefix` must be the exposure walk from its start at time 0, run on
/// `store`, ending at `t = prefix.horizon()`. After a closure the walk
/// regenerates with fresh clocks.
pub fn escape_probability(
    topology: &Topology,
    prefix: &Trajectory,
    store: &mut ClockStore,
    k: u32,
    resamples: usize,
    seed: u64,
) -> Result<EscapeEstimate, EstimatorError> {
    check_samples(resamples)?;
    if k == 0 || k > 12 {
        return Err(EstimatorError::InvalidParameter(format!(
            "scale k must lie in 1..=12, got {k}"
        )));
    }
    let beta = store.beta();
    if prefix.beta() != beta {
        return Err(EstimatorError::InvalidParameter(
            "prefix and store have different β".into(),
        ));
    }
    if prefix.origin() != CyclicTime::ZERO || !prefix.regen_marks().is_empty() {
        return Err(EstimatorError::InvalidParameter(
            "prefix must be a single walk started at time 0".into(),
        ));
    }
    let t = prefix.horizon();
    let span = (k as f64).powi(3) * 4f64.powi(k as i32);
    let threshold = k as f64 * 2f64.powi(k as i32);
    let horizon = t.add_real(span, beta);
    let start = prefix.start();
    let anchor = prefix.end_position();

    let stores: Vec<ClockStore> = (0..resamples).map(|_| store.resample_undiscovered()).collect();
    let escaped = stores
        .into_par_iter()
        .enumerate()
        .map(|(r, mut st)| {
            let out = simulate_cyclic_walk(topology, start, horizon, &mut st, WalkOptions::default())?;
            let replay = out.trajectory.jumps().iter().take_while(|j| j.time <= t);
            if !replay.eq(prefix.jumps().iter()) {
                return Err(EstimatorError::InvalidParameter(
                    "the store does not reproduce the prefix".into(),
                ));
            }
            let end = match out.tau_reg {
                Some(tau) if tau < horizon => {
                    let rest = horizon.minus_periods(tau.period).expect("closure precedes the horizon");
                    let seed = rng::derive_seed(seed, [tag::RESAMPLE, r as u64]);
                    simulate_regenerated_walk(topology, beta, start, rest, seed)?
                        .end_position()
                        .clone()
                }
                _ => out.trajectory.end_position().clone(),
            };
            Ok((end.dist2(anchor) as f64) >= threshold * threshold)
        })
        .collect::<Result<Vec<bool>, EstimatorError>>()?;
    let hits = escaped.iter().filter(|&&e| e).count() as u64;
    Ok(EscapeEstimate {
        estimate: Estimate::proportion(hits, resamples as u64),
        k,
        t,
        span,
        threshold,
        warning: (resamples < MIN_RESAMPLES).then(|| format!("only {resamples} resamples; the interval is wide")),
    })
}

/// Two cyclic walks in one clock environment: `W_1` from the origin at time
/// 0 and `W_2` from a neighbor of the origin at a uniform offset, each run
/// for `t_n' + 1` (or until it closes).
pub fn pair_replica(
    d: usize,
    beta: f64,
    params: &ProximityParams,
    seed: u64,
    i: usize,
) -> Result<PairProximity, EstimatorError> {
    let topo = Topology::lattice(d)?;
    let mut r = super::replica_rng(seed, i);
    let mut store = ClockStore::new(beta, rng::derive_seed(seed, [tag::REPLICA, i as u64]))?;
    let u2 = topo.step(&topo.origin(), r.random_range(0..topo.degree()));
    let q2 = CyclicTime::new(0, r.random_range(0.0..beta));
    let mut run = |u: &Site, q: CyclicTime| {
        let h = q.add_real(params.reduced_horizon() + 1.0, beta);
        simulate_cyclic_walk_from(&topo, u, q, h, &mut store, WalkOptions::default()).map(|o| o.trajectory)
    };
    let w1 = run(&topo.origin(), CyclicTime::ZERO)?;
    let w2 = run(&u2, q2)?;
    Ok(pair_proximity(&w1, &w2, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_prefixes_from_another_store() {
        let topo = Topology::lattice(2).unwrap();
        let mut a = ClockStore::new(4.0, 1).unwrap();
        let prefix = simulate_cyclic_walk(
            &topo,
            &topo.origin(),
            CyclicTime::new(0, 3.0),
            &mut a,
            WalkOptions::default(),
        )
        .unwrap()
        .trajectory;
        assert!(!prefix.jumps().is_empty());
        let mut b = ClockStore::new(4.0, 2).unwrap();
        assert!(escape_probability(&topo, &prefix, &mut b, 1, 10, 0).is_err());
        assert!(escape_probability(&topo, &prefix, &mut a, 1, 10, 0).is_ok());
    }

    #[test]
    fn pair_replicas_are_reproducible() {
        let p = ProximityParams::new(1, 2.0).unwrap();
        let a = pair_replica(2, 4.0, &p, 9, 3).unwrap();
        assert_eq!(a, pair_replica(2, 4.0, &p, 9, 3).unwrap());
        assert!(a.measure >= 0.0 && a.measure <= a.window);
    }

    #[test]
    fn few_resamples_warn() {
        let topo = Topology::lattice(2).unwrap();
        let mut store = ClockStore::new(4.0, 1).unwrap();
        let prefix = Trajectory::new(4.0, topo.origin(), CyclicTime::ZERO, vec![], CyclicTime::ZERO, vec![]).unwrap();
        let r = escape_probability(&topo, &prefix, &mut store, 1, 5, 0).unwrap();
        assert!(r.warning.is_some());
        assert_eq!(r.span, 4.0);
        assert_eq!(r.threshold, 2.0);
    }
}
