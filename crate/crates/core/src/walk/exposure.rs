use super::{check_beta, CyclicTime, Jump, Trajectory, WalkError, WalkOptions, WalkOutcome};
use crate::clocks::{ClockStore, NextRing};
use crate::graph::{Edge, Site, Topology};

/// Runs the cyclic walk from `start` at time 0 up to `horizon` by exposing
/// the ring schedules of the incident edges.
pub fn simulate_cyclic_walk(
    topology: &Topology,
    start: &Site,
    horizon: CyclicTime,
    store: &mut ClockStore,
    opts: WalkOptions,
) -> Result<WalkOutcome, WalkError> {
    simulate_cyclic_walk_from(topology, start, CyclicTime::ZERO, horizon, store, opts)
}

/// Runs the cyclic walk started at `start` at cyclic time `origin`.
///
/// The cycle closes at the first time `origin + kβ`, `k ≥ 1`, at which the
/// walk is back at `start`. Without periodic continuation the walk stops there.
pub fn simulate_cyclic_walk_from(
    topology: &Topology,
    start: &Site,
    origin: CyclicTime,
    horizon: CyclicTime,
    store: &mut ClockStore,
    opts: WalkOptions,
) -> Result<WalkOutcome, WalkError> {
    let beta = store.beta();
    check_beta(beta)?;
    topology.validate(start)?;
    if horizon < origin {
        return Err(WalkError::HorizonBeforeStart { horizon, origin });
    }
    if origin.offset >= beta {
        return Err(WalkError::InvalidTrajectory("origin offset must lie in [0, β)".into()));
    }

    let degree = topology.degree();
    let mut pos = start.clone();
    let mut now = origin;
    // the edge crossed at `now`; rings of larger edges at the same offset are still pending
    let mut last_edge: Option<Edge> = None;
    let mut boundary = origin.plus_periods(1);
    let mut jumps = Vec::new();
    let mut tau_reg = None;
    let mut tie_events = 0;

    loop {
        let mut next: Option<(CyclicTime, Edge)> = None;
        for dir in 0..degree {
            let edge = topology.edge_at(&pos, dir);
            let inclusive = last_edge.as_ref().is_some_and(|l| edge > *l);
            let NextRing::Ring { time, wrapped } = store.schedule(&edge).next_ring(now.offset, inclusive) else {
                continue;
            };
            let t = CyclicTime::new(now.period + wrapped as u64, time);
            let better = match &next {
                None => true,
                Some((bt, be)) => (t, &edge) < (*bt, be),
            };
            if better {
                next = Some((t, edge));
            }
        }

        match next {
            Some((t, edge)) if t < boundary && t <= horizon => {
                if t == now && !jumps.is_empty() {
                    tie_events += 1;
                }
                pos = topology.across(&edge, &pos);
                now = t;
                last_edge = Some(edge);
                jumps.push(Jump {
                    time: t,
                    site: pos.clone(),
                });
            }
            _ if boundary <= horizon => {
                now = boundary;
                last_edge = None;
                boundary = boundary.plus_periods(1);
                if tau_reg.is_none() && pos == *start {
                    tau_reg = Some(now);
                    if !opts.periodic_continuation {
                        break;
                    }
                }
            }
            _ => break,
        }
    }

    let end = match tau_reg {
        Some(t) if !opts.periodic_continuation => t,
        _ => horizon,
    };
    Ok(WalkOutcome {
        trajectory: Trajectory::from_parts_unchecked(beta, start.clone(), origin, jumps, end, Vec::new()),
        closed: tau_reg.is_some(),
        tau_reg,
        tie_events,
    })
}
