use serde::{Deserialize, Serialize};

use super::{CyclicTime, WalkError};
use crate::graph::{Site, Topology};

/// A jump: the walk is at `site` from `time` on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: CyclicTime,
    pub site: Site,
}

/// A maximal constant stretch `[from, to)` of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece<'a> {
    pub from: CyclicTime,
    pub to: CyclicTime,
    pub site: &'a Site,
}

/// A right-continuous piecewise-constant lattice path on `[origin, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    beta: f64,
    start: Site,
    origin: CyclicTime,
    jumps: Vec<Jump>,
    horizon: CyclicTime,
    regen_marks: Vec<CyclicTime>,
}

impl Trajectory {
    /// Builds a trajectory, checking the time-ordering invariants.
    pub fn new(
        beta: f64,
        start: Site,
        origin: CyclicTime,
        jumps: Vec<Jump>,
        horizon: CyclicTime,
        regen_marks: Vec<CyclicTime>,
    ) -> Result<Self, WalkError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(WalkError::InvalidBeta(beta));
        }
        let bad = |m: &str| Err(WalkError::InvalidTrajectory(m.to_string()));
        if horizon < origin {
            return bad("horizon precedes origin");
        }
        let in_period = |t: &CyclicTime| t.offset >= 0.0 && t.offset < beta;
        if !in_period(&origin) || !in_period(&horizon) {
            return bad("offset outside [0, β)");
        }
        let mut prev = origin;
        for j in &jumps {
            if j.time <= prev || j.time > horizon || !in_period(&j.time) {
                return bad("jump times must be strictly increasing within (origin, horizon]");
            }
            if j.site.dim() != start.dim() {
                return bad("jump site dimension differs from start");
            }
            prev = j.time;
        }
        let traj = Trajectory {
            beta,
            start,
            origin,
            jumps,
            horizon,
            regen_marks,
        };
        let mut prev_mark = origin;
        for &m in &traj.regen_marks {
            if m.offset != 0.0 || m <= prev_mark || m > horizon {
                return bad("regeneration marks must be increasing multiples of β");
            }
            if traj.position_at(m) != &traj.start {
                return bad("position at a regeneration mark must equal the start");
            }
            prev_mark = m;
        }
        Ok(traj)
    }

    pub(crate) fn from_parts_unchecked(
        beta: f64,
        start: Site,
        origin: CyclicTime,
        jumps: Vec<Jump>,
        horizon: CyclicTime,
        regen_marks: Vec<CyclicTime>,
    ) -> Self {
        Trajectory {
            beta,
            start,
            origin,
            jumps,
            horizon,
            regen_marks,
        }
    }

    /// Checks that consecutive sites are adjacent in `topology`.
    pub fn validate_steps(&self, topology: &Topology) -> Result<(), WalkError> {
        topology.validate(&self.start)?;
        let mut prev = &self.start;
        for j in &self.jumps {
            topology.canonical_edge(prev, &j.site)?;
            prev = &j.site;
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn start(&self) -> &Site {
        &self.start
    }

    pub fn origin(&self) -> CyclicTime {
        self.origin
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn horizon(&self) -> CyclicTime {
        self.horizon
    }

    pub fn regen_marks(&self) -> &[CyclicTime] {
        &self.regen_marks
    }

    /// Length of `[origin, horizon]`.
    pub fn duration(&self) -> f64 {
        self.horizon.since(self.origin, self.beta)
    }

    /// `W(t)` (right-continuous). Times before the origin give the start.
    pub fn position_at(&self, t: CyclicTime) -> &Site {
        let idx = self.jumps.partition_point(|j| j.time <= t);
        if idx == 0 {
            &self.start
        } else {
            &self.jumps[idx - 1].site
        }
    }

    pub fn end_position(&self) -> &Site {
        self.jumps.last().map_or(&self.start, |j| &j.site)
    }

    /// Number of regenerations by time `t`.
    pub fn regen_count(&self, t: CyclicTime) -> usize {
        self.regen_marks.partition_point(|&m| m <= t)
    }

    /// Most recent regeneration time `α(t)` (the origin if none).
    pub fn last_regen(&self, t: CyclicTime) -> CyclicTime {
        let n = self.regen_count(t);
        if n == 0 {
            self.origin
        } else {
            self.regen_marks[n - 1]
        }
    }

    /// Constant stretches covering `[origin, horizon)`; empty pieces are skipped.
    pub fn pieces(&self) -> impl Iterator<Item = Piece<'_>> + '_ {
        let starts = std::iter::once((self.origin, &self.start)).chain(self.jumps.iter().map(|j| (j.time, &j.site)));
        let ends = self.jumps.iter().map(|j| j.time).chain(std::iter::once(self.horizon));
        starts
            .zip(ends)
            .map(|((from, site), to)| Piece { from, to, site })
            .filter(|p| p.from < p.to)
    }

    /// Restricts the trajectory to `[origin, t]`.
    pub fn truncated(&self, t: CyclicTime) -> Trajectory {
        let t = t.clamp(self.origin, self.horizon);
        let n = self.jumps.partition_point(|j| j.time <= t);
        let marks = self.regen_marks.iter().copied().filter(|&m| m <= t).collect();
        Trajectory::from_parts_unchecked(
            self.beta,
            self.start.clone(),
            self.origin,
            self.jumps[..n].to_vec(),
            t,
            marks,
        )
    }

    /// Serializes as one JSON line `{start, beta, origin, horizon, jumps: [[k, s, site], ...], regen: [[k, s], ...]}`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&TrajectoryRecord::from(self)).expect("serializable")
    }

    pub fn from_json_line(line: &str) -> Result<Trajectory, WalkError> {
        let r: TrajectoryRecord =
            serde_json::from_str(line).map_err(|e| WalkError::InvalidTrajectory(e.to_string()))?;
        Trajectory::new(
            r.beta,
            r.start,
            CyclicTime::new(r.origin.0, r.origin.1),
            r.jumps
                .into_iter()
                .map(|(k, s, site)| Jump {
                    time: CyclicTime::new(k, s),
                    site,
                })
                .collect(),
            CyclicTime::new(r.horizon.0, r.horizon.1),
            r.regen.into_iter().map(|(k, s)| CyclicTime::new(k, s)).collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRecord {
    start: Site,
    beta: f64,
    origin: (u64, f64),
    horizon: (u64, f64),
    jumps: Vec<(u64, f64, Site)>,
    regen: Vec<(u64, f64)>,
}

impl From<&Trajectory> for TrajectoryRecord {
    fn from(t: &Trajectory) -> Self {
        TrajectoryRecord {
            start: t.start.clone(),
            beta: t.beta,
            origin: (t.origin.period, t.origin.offset),
            horizon: (t.horizon.period, t.horizon.offset),
            jumps: t
                .jumps
                .iter()
                .map(|j| (j.time.period, j.time.offset, j.site.clone()))
                .collect(),
            regen: t.regen_marks.iter().map(|m| (m.period, m.offset)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj() -> Trajectory {
        let s = |x: i64| Site::new(&[x]);
        Trajectory::new(
            1.0,
            s(0),
            CyclicTime::ZERO,
            vec![
                Jump {
                    time: CyclicTime::new(0, 0.5),
                    site: s(1),
                },
                Jump {
                    time: CyclicTime::new(1, 0.5),
                    site: s(0),
                },
                Jump {
                    time: CyclicTime::new(2, 0.25),
                    site: s(-1),
                },
            ],
            CyclicTime::new(3, 0.0),
            vec![CyclicTime::new(2, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn positions_and_regeneration_queries() {
        let t = traj();
        assert_eq!(t.position_at(CyclicTime::new(0, 0.4)), &Site::new(&[0]));
        assert_eq!(t.position_at(CyclicTime::new(0, 0.5)), &Site::new(&[1]));
        assert_eq!(t.position_at(CyclicTime::new(2, 0.9)), &Site::new(&[-1]));
        assert_eq!(t.regen_count(CyclicTime::new(1, 0.9)), 0);
        assert_eq!(t.regen_count(CyclicTime::new(2, 0.0)), 1);
        assert_eq!(t.last_regen(CyclicTime::new(2, 0.1)), CyclicTime::new(2, 0.0));
        assert_eq!(t.pieces().count(), 4);
        assert_eq!(t.duration(), 3.0);
    }

    #[test]
    fn invariants_are_checked() {
        let s = |x: i64| Site::new(&[x]);
        let unordered = Trajectory::new(
            1.0,
            s(0),
            CyclicTime::ZERO,
            vec![
                Jump {
                    time: CyclicTime::new(0, 0.5),
                    site: s(1),
                },
                Jump {
                    time: CyclicTime::new(0, 0.4),
                    site: s(0),
                },
            ],
            CyclicTime::new(1, 0.0),
            vec![],
        );
        assert!(unordered.is_err());
        let bad_mark = Trajectory::new(
            1.0,
            s(0),
            CyclicTime::ZERO,
            vec![Jump {
                time: CyclicTime::new(0, 0.5),
                site: s(1),
            }],
            CyclicTime::new(2, 0.0),
            vec![CyclicTime::new(1, 0.0)],
        );
        assert!(bad_mark.is_err());
        let topo = Topology::lattice(1).unwrap();
        assert!(traj().validate_steps(&topo).is_ok());
    }

    #[test]
    fn json_line_round_trip() {
        let t = traj();
        assert_eq!(Trajectory::from_json_line(&t.to_json_line()).unwrap(), t);
    }
}
