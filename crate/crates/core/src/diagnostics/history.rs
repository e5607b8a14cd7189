use rustc_hash::FxHashMap;

use super::{visits, Stamp};
use crate::graph::Site;
use crate::walk::{CyclicTime, Trajectory};

/// Whether `W(t)` is within distance 1 of some `W(t - kβ)`, `k ≥ 1`, with
/// `t - kβ` not before the last regeneration `α(t)`.
pub fn interacts_with_past(traj: &Trajectory, t: CyclicTime) -> bool {
    let alpha = traj.last_regen(t);
    let here = traj.position_at(t);
    (1..=t.period)
        .map_while(|k| t.minus_periods(k))
        .take_while(|s| *s >= alpha)
        .any(|s| traj.position_at(s).dist2(here) <= 1)
}

/// Half-open constant stretches `[from, to)` of the path between `from` and `to`.
fn spans(traj: &Trajectory, from: CyclicTime, to: CyclicTime) -> Vec<(Stamp, Stamp, &Site)> {
    let v = visits(traj, from, to);
    let mut out = Vec::with_capacity(v.len());
    for (i, &(t, site)) in v.iter().enumerate() {
        let end = v.get(i + 1).map_or(to, |n| n.0);
        if t < end {
            out.push((t.into(), end.into(), site));
        }
    }
    out
}

/// Sites within Euclidean distance 1 of `x`.
fn unit_ball(x: &Site) -> impl Iterator<Item = Site> + '_ {
    let d = x.dim();
    std::iter::once(x.clone()).chain((0..2 * d).map(move |dir| {
        let mut y = x.clone();
        y.coords_mut()[dir / 2] += if dir % 2 == 0 { -1 } else { 1 };
        y
    }))
}

/// `τ_hit(t)`: the first `s > t` at which `W(s)` comes within distance 1
/// of `W(s')` for some `s' ≡ s (mod β)` with `α(t) < s' < t`.
///
/// Returns `None` when no such time occurs before the horizon.
pub fn tau_hit(traj: &Trajectory, t: CyclicTime) -> Option<CyclicTime> {
    let t = t.min(traj.horizon());
    let alpha = traj.last_regen(t);
    let mut history: FxHashMap<&Site, Vec<(Stamp, Stamp)>> = FxHashMap::default();
    for (c, e, y) in spans(traj, alpha, t) {
        history.entry(y).or_default().push((c, e));
    }
    if history.is_empty() {
        return None;
    }
    for (a, b, x) in spans(traj, t, traj.horizon()) {
        let mut best: Option<Stamp> = None;
        for y in unit_ball(x) {
            let Some(list) = history.get(&y) else { continue };
            for &(c, e) in list {
                // smallest shift m ≥ 1 with e + mβ > a; later shifts only start later
                let m = (a.k - e.k + i64::from(e.s <= a.s)).max(1);
                let lo = c.shift(m);
                if lo < b {
                    let cand = lo.max(a);
                    best = Some(best.map_or(cand, |x| x.min(cand)));
                }
            }
        }
        if let Some(s) = best {
            return Some(s.time());
        }
    }
    None
}

/// `τ_fast(L)`: the first time `t` after the origin at which the walk is at
/// distance at least `L` from one of its positions during `[t - 1, t]`
/// (the window is clipped at the origin).
///
/// The maximum over the window can only grow at jump times, so only those
/// are examined.
pub fn tau_fast(traj: &Trajectory, l: f64) -> Option<CyclicTime> {
    let beta = traj.beta();
    let origin = traj.origin();
    let jumps = traj.jumps();
    let threshold = l * l;
    let mut lo = 0;
    for (i, j) in jumps.iter().enumerate() {
        let w = j.time.sub_real(1.0, beta).map_or(origin, |w| w.max(origin));
        while lo < i && jumps[lo].time <= w {
            lo += 1;
        }
        let before = if lo == 0 { traj.start() } else { &jumps[lo - 1].site };
        let far = std::iter::once(before)
            .chain(jumps[lo..i].iter().map(|p| &p.site))
            .any(|s| s.dist2(&j.site) as f64 >= threshold);
        if far {
            return Some(j.time);
        }
    }
    None
}
