use rand::Rng;

use super::driven::{drive, Live, LiveDriver};
use super::{check_beta, simulate_cyclic_walk, CyclicTime, Jump, Trajectory, WalkError, WalkOptions, WalkOutcome};
use crate::clocks::ClockStore;
use crate::graph::{Site, Topology};
use crate::rng::{self, tag};

/// Concatenates independent walks, each run until its cycle closes.
///
/// `run(i, local_horizon)` must return the `i`-th walk (started at `start`,
/// time 0) up to `local_horizon` or its closure time.
fn regenerate(
    beta: f64,
    start: &Site,
    horizon: CyclicTime,
    mut run: impl FnMut(u64, CyclicTime) -> Result<WalkOutcome, WalkError>,
) -> Result<Trajectory, WalkError> {
    let mut jumps: Vec<Jump> = Vec::new();
    let mut marks = Vec::new();
    let mut elapsed = 0u64;
    for i in 0.. {
        let local = horizon
            .minus_periods(elapsed)
            .expect("elapsed periods never exceed the horizon");
        let out = run(i, local)?;
        jumps.extend(out.trajectory.jumps().iter().map(|j| Jump {
            time: j.time.plus_periods(elapsed),
            site: j.site.clone(),
        }));
        match out.tau_reg {
            Some(tau) if tau <= local => {
                elapsed += tau.period;
                marks.push(CyclicTime::periods(elapsed));
                if CyclicTime::periods(elapsed) >= horizon {
                    break;
                }
            }
            _ => break,
        }
    }
    Ok(Trajectory::from_parts_unchecked(
        beta,
        start.clone(),
        CyclicTime::ZERO,
        jumps,
        horizon,
        marks,
    ))
}

/// The regenerated cyclic walk built from clock stores; regeneration `i`
/// uses a fresh store seeded from `(seed, i)`.
pub fn simulate_regenerated_walk(
    topology: &Topology,
    beta: f64,
    start: &Site,
    horizon: CyclicTime,
    seed: u64,
) -> Result<Trajectory, WalkError> {
    check_beta(beta)?;
    regenerate(beta, start, horizon, |i, local| {
        let mut store = ClockStore::new(beta, rng::derive_seed(seed, [tag::REGENERATION, i]))
            .map_err(|_| WalkError::InvalidBeta(beta))?;
        simulate_cyclic_walk(topology, start, local, &mut store, WalkOptions::default())
    })
}

/// The regenerated cyclic walk built with the driven construction, every
/// regeneration using the next stretch of `rng`.
pub fn simulate_regenerated_driven<R: Rng>(
    topology: &Topology,
    beta: f64,
    start: &Site,
    horizon: CyclicTime,
    rng: &mut R,
) -> Result<Trajectory, WalkError> {
    check_beta(beta)?;
    regenerate(beta, start, horizon, |_, local| {
        let mut src = Live {
            driver: LiveDriver::new(beta, topology.degree()),
            rng: &mut *rng,
        };
        drive(topology, start, beta, local, &mut src, WalkOptions::default())
    })
}
