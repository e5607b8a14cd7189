use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{visits, DiagnosticsError, Stamp};
use crate::graph::Site;
use crate::walk::{CyclicTime, Trajectory};

/// Scale parameters of the pair proximity statistic at level `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximityParams {
    pub n: u32,
    /// Base time `t_0 ∈ (1, 4]`; the scale time is `t_n = 4^n t_0`.
    pub t0: f64,
}

impl ProximityParams {
    pub fn new(n: u32, t0: f64) -> Result<Self, DiagnosticsError> {
        if n == 0 {
            return Err(DiagnosticsError::InvalidParameter("n must be at least 1".into()));
        }
        if !(t0 > 1.0 && t0 <= 4.0) {
            return Err(DiagnosticsError::InvalidParameter("t0 must lie in (1, 4]".into()));
        }
        Ok(ProximityParams { n, t0 })
    }

    pub fn scale_time(&self) -> f64 {
        4f64.powi(self.n as i32) * self.t0
    }

    /// `t_n' = t_n / n⁴`.
    pub fn reduced_horizon(&self) -> f64 {
        self.scale_time() / (self.n as f64).powi(4)
    }

    pub fn radius(&self) -> f64 {
        1.9f64.powi(self.n as i32)
    }

    pub fn budget(&self) -> f64 {
        3.9f64.powi(self.n as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairProximity {
    /// Time `W_2` spends within the proximity radius of `W_1`'s window.
    pub measure: f64,
    /// Length of `W_2`'s window `[q_2, τ_reg^(2) ∧ M ∧ (q_2 + t_n')]`.
    pub window: f64,
    /// First same-offset coincidence, if it happens by `τ_reg^(2) ∧ (q_2 + t_n')`.
    pub merge_time: Option<CyclicTime>,
    pub tau_reg: [Option<CyclicTime>; 2],
    /// `M > τ_reg^(2) ∧ (q_2 + t_n')`.
    pub non_merge: bool,
    pub exceeds_budget: bool,
}

/// First time `origin + kβ` (`k ≥ 1`, not after the horizon) at which the
/// trajectory is back at its start.
pub(crate) fn closure_time(traj: &Trajectory) -> Option<CyclicTime> {
    let origin = traj.origin();
    (1..)
        .map(|k| origin.plus_periods(k))
        .take_while(|&c| c <= traj.horizon())
        .find(|&c| traj.position_at(c) == traj.start())
}

/// A stretch `[lo, hi)`, or `[lo, hi]` when `closed`.
#[derive(Clone, Copy, Debug)]
struct Span {
    lo: Stamp,
    hi: Stamp,
    closed: bool,
}

/// Stretches of `[from, to)` followed by the single point `to`.
fn window_spans(traj: &Trajectory, from: CyclicTime, to: CyclicTime) -> Vec<(Span, &Site)> {
    let v = visits(traj, from, to);
    let mut out = Vec::with_capacity(v.len() + 1);
    for (i, &(t, site)) in v.iter().enumerate() {
        let end = v.get(i + 1).map_or(to, |n| n.0);
        if t < end {
            out.push((
                Span {
                    lo: t.into(),
                    hi: end.into(),
                    closed: false,
                },
                site,
            ));
        }
    }
    out.push((
        Span {
            lo: to.into(),
            hi: to.into(),
            closed: true,
        },
        traj.position_at(to),
    ));
    out
}

/// Earliest point of `a ∩ (c + mβ)` over all integer shifts `m`.
fn first_shifted_overlap(a: Span, c: Span) -> Option<Stamp> {
    // smallest m putting the end of c + mβ at or past the start of a
    let reaches = if c.closed { c.hi.s >= a.lo.s } else { c.hi.s > a.lo.s };
    let m = a.lo.k - c.hi.k + i64::from(!reaches);
    let (lo_c, hi_c) = (c.lo.shift(m), c.hi.shift(m));
    let lower = a.lo.max(lo_c);
    let (upper, upper_closed) = match a.hi.cmp(&hi_c) {
        std::cmp::Ordering::Less => (a.hi, a.closed),
        std::cmp::Ordering::Greater => (hi_c, c.closed),
        std::cmp::Ordering::Equal => (a.hi, a.closed && c.closed),
    };
    (lower < upper || (lower == upper && upper_closed)).then_some(lower)
}

/// Sites within a Euclidean radius of a fixed set, bucketed by cube cells.
struct NearIndex<'a> {
    cell: i64,
    r2: f64,
    cells: FxHashMap<Vec<i64>, Vec<&'a Site>>,
}

impl<'a> NearIndex<'a> {
    fn new(sites: impl IntoIterator<Item = &'a Site>, radius: f64) -> Self {
        let cell = (radius.ceil() as i64).max(1);
        let mut cells: FxHashMap<Vec<i64>, Vec<&Site>> = FxHashMap::default();
        for s in sites {
            cells
                .entry(s.iter().map(|&x| x.div_euclid(cell)).collect())
                .or_default()
                .push(s);
        }
        for list in cells.values_mut() {
            list.sort();
            list.dedup();
        }
        NearIndex {
            cell,
            r2: radius * radius,
            cells,
        }
    }

    fn is_near(&self, x: &Site) -> bool {
        let base: Vec<i64> = x.iter().map(|&v| v.div_euclid(self.cell)).collect();
        let d = base.len();
        let mut offs = vec![-1i64; d];
        loop {
            let key: Vec<i64> = base.iter().zip(&offs).map(|(b, o)| b + o).collect();
            if let Some(list) = self.cells.get(&key) {
                if list.iter().any(|y| (y.dist2(x) as f64) <= self.r2) {
                    return true;
                }
            }
            let mut i = 0;
            while i < d {
                if offs[i] < 1 {
                    offs[i] += 1;
                    break;
                }
                offs[i] = -1;
                i += 1;
            }
            if i == d {
                return false;
            }
        }
    }
}

/// The pair proximity statistic of two cyclic walks started at
/// `(u_i, q_i)` = (start, origin) of each trajectory.
///
/// `W_1`'s window is `[q_1, τ_reg^(1) ∧ (q_1 + t_n')]`. The merge time `M`
/// is the first `s_2 ≥ q_2` with `W_2(s_2) = W_1(s_1)` for some `s_1` in that
/// window and `s_1 ≡ s_2 (mod β)`; it is only searched up to
/// `τ_reg^(2) ∧ (q_2 + t_n')`. Windows are also cut at the trajectory
/// horizons, so trajectories should run at least `t_n'` unless they close.
pub fn pair_proximity(
    w1: &Trajectory,
    w2: &Trajectory,
    p: &ProximityParams,
) -> Result<PairProximity, DiagnosticsError> {
    if w1.beta() != w2.beta() {
        return Err(DiagnosticsError::MismatchedBeta(w1.beta(), w2.beta()));
    }
    let beta = w1.beta();
    let reduced = p.reduced_horizon();
    let tau = [closure_time(w1), closure_time(w2)];
    let end = |w: &Trajectory, tau: Option<CyclicTime>| {
        let mut e = w.origin().add_real(reduced, beta).min(w.horizon());
        if let Some(t) = tau {
            e = e.min(t);
        }
        e
    };
    let e1 = end(w1, tau[0]);
    let cap2 = end(w2, tau[1]);

    let spans1 = window_spans(w1, w1.origin(), e1);
    let mut by_site: FxHashMap<&Site, Vec<Span>> = FxHashMap::default();
    for &(span, site) in &spans1 {
        by_site.entry(site).or_default().push(span);
    }
    let spans2 = window_spans(w2, w2.origin(), cap2);
    let mut merge: Option<Stamp> = None;
    for &(a, x) in &spans2 {
        if let Some(list) = by_site.get(x) {
            merge = list.iter().filter_map(|&c| first_shifted_overlap(a, c)).min();
            if merge.is_some() {
                break;
            }
        }
    }
    let merge_time = merge.map(Stamp::time);
    let e2 = merge_time.map_or(cap2, |m| m.min(cap2));

    let near = NearIndex::new(spans1.iter().map(|&(_, s)| s), p.radius());
    let mut memo: FxHashMap<&Site, bool> = FxHashMap::default();
    let mut measure = 0.0;
    for &(a, x) in &spans2 {
        if a.closed || a.lo.time() >= e2 {
            continue;
        }
        let hi = a.hi.time().min(e2);
        if *memo.entry(x).or_insert_with(|| near.is_near(x)) {
            measure += hi.since(a.lo.time(), beta);
        }
    }

    Ok(PairProximity {
        measure,
        window: e2.since(w2.origin(), beta),
        merge_time,
        tau_reg: tau,
        non_merge: merge_time.is_none(),
        exceeds_budget: measure >= p.budget(),
    })
}
