use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{power, visits, DiagnosticsConfig};
use crate::graph::{block_of, BlockId, Site};
use crate::walk::{CyclicTime, Trajectory};

/// A heavy partition block at the report time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyEntry {
    pub block: BlockId,
    /// Distinct sites of the block visited since the last regeneration.
    pub visited: usize,
    /// When the block became heavy (for small blocks: super heavy).
    pub first_heavy: CyclicTime,
    pub super_heavy: bool,
    pub super_since: Option<CyclicTime>,
    /// Whether the dwell-time rule for blocks below the size threshold applied.
    pub small: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyReport {
    pub time: CyclicTime,
    /// Sorted by level, then corner.
    pub entries: Vec<HeavyEntry>,
}

/// First visit time of every site visited during `[α(t), t]`.
fn first_visits(traj: &Trajectory, alpha: CyclicTime, t: CyclicTime) -> FxHashMap<&Site, CyclicTime> {
    let mut seen: FxHashMap<&Site, CyclicTime> = FxHashMap::default();
    for (time, site) in visits(traj, alpha, t) {
        seen.entry(site).or_insert(time);
    }
    seen
}

/// Heavy and super heavy blocks of the dyadic partitions at time `t`.
///
/// Levels whose blocks are at least `cfg.small_block_threshold` wide are
/// heavy once `heavy_base^n` distinct sites have been visited since `α(t)`;
/// smaller blocks are reported when they were visited at least
/// `cfg.small_block_window` before `t`.
pub fn heavy_blocks(traj: &Trajectory, t: CyclicTime, cfg: &DiagnosticsConfig) -> HeavyReport {
    let t = t.clamp(traj.origin(), traj.horizon());
    let beta = traj.beta();
    let alpha = traj.last_regen(t);
    let seen = first_visits(traj, alpha, t);
    let mut entries = Vec::new();
    let cutoff = t.sub_real(cfg.small_block_window, beta);

    for level in 1u32.. {
        let small = cfg.is_small_level(level);
        if !small && power(cfg.heavy_base, level) > seen.len() as u64 {
            break;
        }
        let mut blocks: FxHashMap<BlockId, Vec<CyclicTime>> = FxHashMap::default();
        for (&site, &time) in &seen {
            blocks.entry(block_of(site, level)).or_default().push(time);
        }
        for (block, mut times) in blocks {
            times.sort();
            let visited = times.len();
            if small {
                if cutoff.is_some_and(|c| times[0] <= c) {
                    let since = times[0].add_real(cfg.small_block_window, beta);
                    entries.push(HeavyEntry {
                        block,
                        visited,
                        first_heavy: since,
                        super_heavy: true,
                        super_since: Some(since),
                        small: true,
                    });
                }
                continue;
            }
            let heavy = power(cfg.heavy_base, level) as usize;
            if visited < heavy {
                continue;
            }
            let sup = power(cfg.super_heavy_base, level) as usize;
            entries.push(HeavyEntry {
                block,
                visited,
                first_heavy: times[heavy - 1],
                super_heavy: visited >= sup,
                super_since: (visited >= sup).then(|| times[sup - 1]),
                small: false,
            });
        }
    }
    entries.sort_by(|a, b| a.block.cmp(&b.block));
    HeavyReport { time: t, entries }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedReport {
    /// Maximal relaxed intervals `[from, to)`.
    pub intervals: Vec<(CyclicTime, CyclicTime)>,
    pub measure: f64,
    pub duration: f64,
    pub fraction: f64,
    /// `n` with duration in `(4^n, 4^{n+1}]`, when `n ≥ 1`.
    pub scale: Option<u32>,
    pub required_fraction: Option<f64>,
    pub relaxed_path: Option<bool>,
}

/// Visited sites bucketed into cubes of side `2^level`.
struct Grid {
    level: u32,
    cells: FxHashMap<Site, Vec<(Site, CyclicTime)>>,
}

impl Grid {
    fn new(level: u32) -> Self {
        Grid {
            level,
            cells: FxHashMap::default(),
        }
    }

    fn cell_of(&self, site: &Site) -> Site {
        Site::new(&site.iter().map(|&x| x >> self.level).collect::<Vec<_>>())
    }

    fn insert(&mut self, site: &Site, time: CyclicTime) {
        self.cells
            .entry(self.cell_of(site))
            .or_default()
            .push((site.clone(), time));
    }

    /// Cells meeting the centered box `p + [-2^(level-1), 2^(level-1))^d`.
    fn cells_for(&self, p: &Site) -> Vec<&Vec<(Site, CyclicTime)>> {
        let h = 1i64 << (self.level - 1);
        let lo: Vec<i64> = p.iter().map(|&x| (x - h) >> self.level).collect();
        let hi: Vec<i64> = p.iter().map(|&x| (x + h - 1) >> self.level).collect();
        let d = lo.len();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            if let Some(c) = self.cells.get(&Site::new(&cur)) {
                out.push(c);
            }
            let mut i = 0;
            while i < d {
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo[i];
                i += 1;
            }
            if i == d {
                return out;
            }
        }
    }

    fn count_in_box(&self, p: &Site, at_least: usize) -> bool {
        let cells = self.cells_for(p);
        if cells.iter().map(|c| c.len()).sum::<usize>() < at_least {
            return false;
        }
        let mut n = 0;
        for c in cells {
            for (s, _) in c {
                if crate::graph::in_centered_box(s, p, self.level) {
                    n += 1;
                    if n >= at_least {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn earliest_in_box(&self, p: &Site) -> Option<CyclicTime> {
        self.cells_for(p)
            .into_iter()
            .flatten()
            .filter(|(s, _)| crate::graph::in_centered_box(s, p, self.level))
            .map(|&(_, t)| t)
            .min()
    }
}

/// Sites visited since the last regeneration, indexed for box queries.
struct VisitIndex<'c> {
    cfg: &'c DiagnosticsConfig,
    first: FxHashMap<Site, CyclicTime>,
    small: Option<Grid>,
    large: Vec<Grid>,
    first_large: u32,
}

impl<'c> VisitIndex<'c> {
    fn new(cfg: &'c DiagnosticsConfig) -> Self {
        let small_top = cfg.largest_small_level();
        VisitIndex {
            cfg,
            first: FxHashMap::default(),
            small: small_top.map(Grid::new),
            large: Vec::new(),
            first_large: small_top.map_or(1, |n| n + 1),
        }
    }

    fn reset(&mut self) {
        *self = VisitIndex::new(self.cfg);
    }

    fn visit(&mut self, site: &Site, time: CyclicTime) {
        if self.first.contains_key(site) {
            return;
        }
        self.first.insert(site.clone(), time);
        if let Some(g) = &mut self.small {
            g.insert(site, time);
        }
        for g in &mut self.large {
            g.insert(site, time);
        }
        // open the next level once it can hold a super heavy block
        loop {
            let level = self.first_large + self.large.len() as u32;
            if power(self.cfg.super_heavy_base, level) > self.first.len() as u64 {
                break;
            }
            let mut g = Grid::new(level);
            for (s, &t) in &self.first {
                g.insert(s, t);
            }
            self.large.push(g);
        }
    }

    fn large_super_heavy(&self, p: &Site) -> bool {
        self.large
            .iter()
            .any(|g| g.count_in_box(p, power(self.cfg.super_heavy_base, g.level) as usize))
    }

    /// Earliest first visit inside the centered small boxes around `p`.
    fn small_earliest(&self, p: &Site) -> Option<CyclicTime> {
        self.small.as_ref().and_then(|g| g.earliest_in_box(p))
    }
}

/// Relaxed times of the whole trajectory.
///
/// A time `s` is relaxed when no centered box `W(s) + [-2^(n-1), 2^(n-1))^d`
/// is super heavy at `s`. The path predicate compares the relaxed measure
/// with `(9/10 + 1/n)` times the duration.
pub fn relaxed_times(traj: &Trajectory, cfg: &DiagnosticsConfig) -> RelaxedReport {
    let beta = traj.beta();
    let origin = traj.origin();
    let horizon = traj.horizon();
    let marks = traj.regen_marks();

    // breakpoints: jumps (with their target) and regeneration marks (`None`)
    let mut events: Vec<(CyclicTime, Option<&Site>)> = traj.jumps().iter().map(|j| (j.time, Some(&j.site))).collect();
    events.extend(
        marks
            .iter()
            .filter(|&&m| m > origin && m <= horizon)
            .map(|&m| (m, None)),
    );
    events.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.is_some().cmp(&b.1.is_some())));

    let mut index = VisitIndex::new(cfg);
    let mut intervals: Vec<(CyclicTime, CyclicTime)> = Vec::new();
    let mut from = origin;
    let mut pos = traj.start().clone();
    index.visit(&pos, from);

    let push = |a: CyclicTime, b: CyclicTime, intervals: &mut Vec<(CyclicTime, CyclicTime)>| {
        if a >= b {
            return;
        }
        match intervals.last_mut() {
            Some(last) if last.1 == a => last.1 = b,
            _ => intervals.push((a, b)),
        }
    };

    let mut i = 0;
    loop {
        let to = events.get(i).map_or(horizon, |e| e.0);
        if from < to && !index.large_super_heavy(&pos) {
            let end = match index.small_earliest(&pos) {
                Some(f) => to.min(f.add_real(cfg.small_block_window, beta).max(from)),
                None => to,
            };
            push(from, end, &mut intervals);
        }
        let Some(&(time, target)) = events.get(i) else { break };
        from = time;
        match target {
            Some(site) => pos = site.clone(),
            None => index.reset(),
        }
        index.visit(&pos, time);
        i += 1;
    }

    // summing the merged intervals keeps the rounding independent of the piece count
    let measure: f64 = intervals.iter().map(|&(a, b)| b.since(a, beta)).sum();
    let duration = traj.duration();
    let fraction = if duration > 0.0 { measure / duration } else { 1.0 };
    let scale = path_scale(duration);
    let required_fraction = scale.map(DiagnosticsConfig::relaxed_fraction);
    RelaxedReport {
        intervals,
        measure,
        duration,
        fraction,
        scale,
        required_fraction,
        relaxed_path: required_fraction.map(|f| measure >= f * duration),
    }
}

/// `n ≥ 1` with `t ∈ (4^n, 4^{n+1}]`.
fn path_scale(t: f64) -> Option<u32> {
    let mut n = 0u32;
    while 4f64.powi(n as i32 + 1) < t {
        n += 1;
    }
    (n >= 1 && t > 4f64.powi(n as i32)).then_some(n)
}
