//! Brute-force reference implementations shared by the integration tests.
//!
//! Everything here is deliberately naive: linear scans over the jump list,
//! explicit enumeration of period shifts and block membership tests.

#![allow(dead_code)]

pub mod kernel;

use std::collections::{BTreeMap, BTreeSet};

use stirring::diagnostics::{DiagnosticsConfig, ProximityParams};
use stirring::graph::{block_of, in_centered_box, BlockId};
use stirring::walk::{simulate_cyclic_walk_from, simulate_regenerated_walk, WalkOptions};
use stirring::{ClockStore, CyclicTime, Site, Topology, Trajectory};

/// Signed time used by the oracles when shifting by whole periods.
pub type T = (i64, f64);

pub fn t(c: CyclicTime) -> T {
    (c.period as i64, c.offset)
}

pub fn lt(a: T, b: T) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

pub fn le(a: T, b: T) -> bool {
    !lt(b, a)
}

pub fn tmax(a: T, b: T) -> T {
    if lt(a, b) {
        b
    } else {
        a
    }
}

pub fn tmin(a: T, b: T) -> T {
    if lt(a, b) {
        a
    } else {
        b
    }
}

/// `W(s)` by a linear scan.
pub fn position(traj: &Trajectory, s: CyclicTime) -> Site {
    let mut pos = traj.start().clone();
    for j in traj.jumps() {
        if j.time <= s {
            pos = j.site.clone();
        } else {
            break;
        }
    }
    pos
}

pub fn alpha(traj: &Trajectory, s: CyclicTime) -> CyclicTime {
    let mut a = traj.origin();
    for &m in traj.regen_marks() {
        if m <= s {
            a = m;
        }
    }
    a
}

/// Constant stretches `[from, to)` covering `[origin, horizon)`, by linear scan.
pub fn stretches(traj: &Trajectory) -> Vec<(CyclicTime, CyclicTime, Site)> {
    let mut out = Vec::new();
    let mut from = traj.origin();
    let mut site = traj.start().clone();
    for j in traj.jumps() {
        if from < j.time {
            out.push((from, j.time, site.clone()));
        }
        from = j.time;
        site = j.site.clone();
    }
    if from < traj.horizon() {
        out.push((from, traj.horizon(), site));
    }
    out
}

pub fn interacts_oracle(traj: &Trajectory, s: CyclicTime) -> bool {
    let a = alpha(traj, s);
    let here = position(traj, s);
    for k in 1..=s.period {
        let past = CyclicTime::new(s.period - k, s.offset);
        if past < a {
            break;
        }
        if position(traj, past).dist2(&here) <= 1 {
            return true;
        }
    }
    false
}

pub fn tau_hit_oracle(traj: &Trajectory, s: CyclicTime) -> Option<CyclicTime> {
    let a = alpha(traj, s);
    let all = stretches(traj);
    let history: Vec<_> = all
        .iter()
        .filter_map(|(f, e, x)| {
            let lo = (*f).max(a);
            let hi = (*e).min(s);
            (lo < hi).then(|| (t(lo), t(hi), x.clone()))
        })
        .collect();
    let future: Vec<_> = all
        .iter()
        .filter_map(|(f, e, x)| {
            let lo = (*f).max(s);
            (lo < *e).then(|| (t(lo), t(*e), x.clone()))
        })
        .collect();
    let kmax = traj.horizon().period as i64 + 1;
    let mut best: Option<T> = None;
    for (fa, fb, x) in &future {
        for (hc, he, y) in &history {
            if x.dist2(y) > 1 {
                continue;
            }
            for m in 1..=kmax {
                let lo = tmax(*fa, (hc.0 + m, hc.1));
                let hi = tmin(*fb, (he.0 + m, he.1));
                if lt(lo, hi) && best.is_none_or(|b| lt(lo, b)) {
                    best = Some(lo);
                }
            }
        }
    }
    best.map(|(k, s)| CyclicTime::new(k as u64, s))
}

pub fn tau_fast_oracle(traj: &Trajectory, l: f64) -> Option<CyclicTime> {
    for j in traj.jumps() {
        let w = j
            .time
            .sub_real(1.0, traj.beta())
            .map_or(traj.origin(), |w| w.max(traj.origin()));
        let mut sites = vec![position(traj, w)];
        sites.extend(
            traj.jumps()
                .iter()
                .filter(|p| p.time > w && p.time <= j.time)
                .map(|p| p.site.clone()),
        );
        if sites.iter().any(|s| (s.dist2(&j.site) as f64).sqrt() >= l) {
            return Some(j.time);
        }
    }
    None
}

/// First visit time of each site seen during `[α(s), s]`.
pub fn visited_since(traj: &Trajectory, s: CyclicTime) -> BTreeMap<Site, CyclicTime> {
    let a = alpha(traj, s);
    let mut out = BTreeMap::new();
    out.insert(position(traj, a), a);
    for j in traj.jumps() {
        if j.time > a && j.time <= s {
            out.entry(j.site.clone()).or_insert(j.time);
        }
    }
    out
}

/// `(block, visited, first heavy, super heavy)` for every reported block.
pub fn heavy_oracle(
    traj: &Trajectory,
    s: CyclicTime,
    cfg: &DiagnosticsConfig,
) -> Vec<(BlockId, usize, CyclicTime, bool)> {
    let seen = visited_since(traj, s);
    let cutoff = s.sub_real(cfg.small_block_window, traj.beta());
    let mut out = Vec::new();
    for level in 1u32..40 {
        let small = ((1u64 << level) as f64) < cfg.small_block_threshold;
        let heavy = cfg.heavy_base.pow(level) as usize;
        if !small && heavy > seen.len() {
            break;
        }
        let candidates: BTreeSet<BlockId> = seen.keys().map(|u| block_of(u, level)).collect();
        for b in candidates {
            let mut times: Vec<CyclicTime> = seen.iter().filter(|(u, _)| b.contains(u)).map(|(_, &t)| t).collect();
            times.sort();
            if small {
                if cutoff.is_some_and(|c| times[0] <= c) {
                    out.push((
                        b,
                        times.len(),
                        times[0].add_real(cfg.small_block_window, traj.beta()),
                        true,
                    ));
                }
            } else if times.len() >= heavy {
                let sup = cfg.super_heavy_base.pow(level) as usize;
                out.push((b.clone(), times.len(), times[heavy - 1], times.len() >= sup));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Relaxedness of the single time `s`, recomputed from scratch.
pub fn relaxed_at(traj: &Trajectory, s: CyclicTime, cfg: &DiagnosticsConfig) -> bool {
    let seen = visited_since(traj, s);
    let p = position(traj, s);
    let cutoff = s.sub_real(cfg.small_block_window, traj.beta());
    for level in 1u32..40 {
        let small = ((1u64 << level) as f64) < cfg.small_block_threshold;
        if small {
            if seen
                .iter()
                .any(|(u, &f)| in_centered_box(u, &p, level) && cutoff.is_some_and(|c| f <= c))
            {
                return false;
            }
            continue;
        }
        let sup = cfg.super_heavy_base.pow(level) as usize;
        if sup > seen.len() {
            break;
        }
        if seen.keys().filter(|u| in_centered_box(u, &p, level)).count() >= sup {
            return false;
        }
    }
    true
}

/// Relaxed measure by evaluating every stretch between candidate breakpoints
/// at its midpoint.
pub fn relaxed_measure_oracle(traj: &Trajectory, cfg: &DiagnosticsConfig) -> f64 {
    let beta = traj.beta();
    let mut points: Vec<CyclicTime> = vec![traj.origin(), traj.horizon()];
    let mut starts = vec![traj.origin()];
    starts.extend(traj.jumps().iter().map(|j| j.time));
    starts.extend(traj.regen_marks().iter().copied());
    for &s in &starts {
        points.push(s);
        points.push(s.add_real(cfg.small_block_window, beta));
    }
    points.retain(|&p| p >= traj.origin() && p <= traj.horizon());
    points.sort();
    points.dedup();
    let mut measure = 0.0;
    for w in points.windows(2) {
        let len = w[1].since(w[0], beta);
        if len <= 0.0 {
            continue;
        }
        let mid = w[0].add_real(len / 2.0, beta);
        if relaxed_at(traj, mid, cfg) {
            measure += len;
        }
    }
    measure
}

pub struct PairOracle {
    pub measure: f64,
    pub merge: Option<CyclicTime>,
    pub tau: [Option<CyclicTime>; 2],
}

fn closure_oracle(traj: &Trajectory) -> Option<CyclicTime> {
    let mut k = 1;
    loop {
        let c = traj.origin().plus_periods(k);
        if c > traj.horizon() {
            return None;
        }
        if position(traj, c) == *traj.start() {
            return Some(c);
        }
        k += 1;
    }
}

/// Window stretches as `(lo, hi, closed, site)`; the end point is a closed
/// degenerate stretch.
fn window(traj: &Trajectory, end: CyclicTime) -> Vec<(T, T, bool, Site)> {
    let mut out: Vec<_> = stretches(traj)
        .into_iter()
        .filter_map(|(f, e, x)| {
            let hi = e.min(end);
            (f < hi).then(|| (t(f), t(hi), false, x))
        })
        .collect();
    out.push((t(end), t(end), true, position(traj, end)));
    out
}

pub fn pair_oracle(w1: &Trajectory, w2: &Trajectory, p: &ProximityParams) -> PairOracle {
    let beta = w1.beta();
    let reduced = p.reduced_horizon();
    let tau = [closure_oracle(w1), closure_oracle(w2)];
    let end = |w: &Trajectory, tau: Option<CyclicTime>| {
        let mut e = w.origin().add_real(reduced, beta).min(w.horizon());
        if let Some(x) = tau {
            e = e.min(x);
        }
        e
    };
    let e1 = end(w1, tau[0]);
    let cap2 = end(w2, tau[1]);
    let win1 = window(w1, e1);
    let win2 = window(w2, cap2);
    let kmax = (w1.horizon().period.max(w2.horizon().period) + 2) as i64;

    let mut merge: Option<T> = None;
    for (a, b, ca, x) in &win2 {
        for (c, e, cc, y) in &win1 {
            if x != y {
                continue;
            }
            for m in -kmax..=kmax {
                let (c, e) = ((c.0 + m, c.1), (e.0 + m, e.1));
                let hit = match (ca, cc) {
                    (false, false) => {
                        let lo = tmax(*a, c);
                        lt(lo, tmin(*b, e)).then_some(lo)
                    }
                    (false, true) => (le(*a, c) && lt(c, *b)).then_some(c),
                    (true, false) => (le(c, *a) && lt(*a, e)).then_some(*a),
                    (true, true) => (*a == c).then_some(*a),
                };
                if let Some(h) = hit {
                    if merge.is_none_or(|m| lt(h, m)) {
                        merge = Some(h);
                    }
                }
            }
        }
    }
    let merge = merge.map(|(k, s)| CyclicTime::new(k as u64, s));
    let e2 = merge.map_or(cap2, |m| m.min(cap2));

    let r2 = p.radius() * p.radius();
    let mut measure = 0.0;
    for (f, e, x) in stretches(w2) {
        let hi = e.min(e2);
        if f >= hi {
            continue;
        }
        if win1.iter().any(|(_, _, _, y)| (x.dist2(y) as f64) <= r2) {
            measure += hi.since(f, beta);
        }
    }
    PairOracle { measure, merge, tau }
}

/// A reproducible random trajectory with `d ∈ {2, 5}` and `β ∈ {4, 16}`.
pub fn random_trajectory(i: u64) -> (usize, Trajectory) {
    let d = if i.is_multiple_of(2) { 2 } else { 5 };
    let beta = if (i / 2).is_multiple_of(2) { 4.0 } else { 16.0 };
    let periods = match (d, beta as u64) {
        (2, 4) => 12 + i % 13,
        (2, _) => 2 + i % 5,
        (_, 4) => 4 + i % 9,
        _ => 1 + i % 4,
    };
    let topo = Topology::lattice(d).unwrap();
    let horizon = CyclicTime::new(periods, beta * ((i * 37 % 100) as f64) / 100.0);
    let traj = simulate_regenerated_walk(&topo, beta, &topo.origin(), horizon, 1000 + i).unwrap();
    (d, traj)
}

/// Two walks in one clock environment, started near each other at random
/// cyclic times, each run for `t_n'` (or until it closes).
pub fn random_pair(i: u64, p: &ProximityParams) -> (Trajectory, Trajectory) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(i);
    let d = if i.is_multiple_of(2) { 2 } else { 5 };
    let beta = if (i / 2).is_multiple_of(2) { 4.0 } else { 16.0 };
    let topo = Topology::lattice(d).unwrap();
    let mut store = ClockStore::new(beta, 5000 + i).unwrap();
    let u1 = topo.origin();
    let mut u2 = topo.origin();
    for _ in 0..rng.random_range(0..4) {
        u2 = topo.step(&u2, rng.random_range(0..2 * d));
    }
    let q1 = CyclicTime::new(0, rng.random_range(0.0..beta));
    let q2 = CyclicTime::new(0, rng.random_range(0.0..beta));
    let run = |u: &Site, q: CyclicTime, store: &mut ClockStore| {
        let h = q.add_real(p.reduced_horizon() + 1.0, beta);
        simulate_cyclic_walk_from(&topo, u, q, h, store, WalkOptions::default())
            .unwrap()
            .trajectory
    };
    let w1 = run(&u1, q1, &mut store);
    let w2 = run(&u2, q2, &mut store);
    (w1, w2)
}

/// A configuration under which heavy blocks and both relaxedness rules occur
/// on short random paths.
pub fn stress_config() -> DiagnosticsConfig {
    DiagnosticsConfig {
        epsilon: 0.5,
        heavy_base: 2,
        super_heavy_base: 3,
        small_block_threshold: 4.0,
        small_block_window: 1.5,
    }
}
