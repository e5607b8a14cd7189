use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rustc_hash::FxHashMap;

use super::{check_beta, CyclicTime, Jump, Trajectory, WalkError, WalkOptions, WalkOutcome};
use crate::graph::{Site, Topology};

/// A recorded sample of the driving walk: attempted jump directions at
/// increasing times, valid up to `horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverPath {
    beta: f64,
    degree: usize,
    events: Vec<(CyclicTime, usize)>,
    horizon: CyclicTime,
}

impl DriverPath {
    pub fn new(
        beta: f64,
        degree: usize,
        events: Vec<(CyclicTime, usize)>,
        horizon: CyclicTime,
    ) -> Result<Self, WalkError> {
        check_beta(beta)?;
        let mut prev: Option<CyclicTime> = None;
        for &(t, dir) in &events {
            if dir >= degree || t.offset < 0.0 || t.offset >= beta || t > horizon {
                return Err(WalkError::InvalidDriver(format!("bad event at {t}")));
            }
            if prev.is_some_and(|p| t <= p) || t == CyclicTime::ZERO {
                return Err(WalkError::InvalidDriver("event times must strictly increase".into()));
            }
            prev = Some(t);
        }
        Ok(DriverPath {
            beta,
            degree,
            events,
            horizon,
        })
    }

    /// Samples the rate-1-per-direction walk on `[0, horizon]`.
    pub fn sample<R: Rng + ?Sized>(
        beta: f64,
        degree: usize,
        horizon: CyclicTime,
        rng: &mut R,
    ) -> Result<Self, WalkError> {
        check_beta(beta)?;
        let mut live = LiveDriver::new(beta, degree);
        let mut events = Vec::new();
        while let Some(ev) = live.next_event(rng) {
            if ev.0 > horizon {
                break;
            }
            events.push(ev);
        }
        Ok(DriverPath {
            beta,
            degree,
            events,
            horizon,
        })
    }

    pub fn events(&self) -> &[(CyclicTime, usize)] {
        &self.events
    }

    pub fn horizon(&self) -> CyclicTime {
        self.horizon
    }
}

/// Lazily generated driving walk (Poisson attempts of total rate `degree`).
#[derive(Clone, Debug)]
pub struct LiveDriver {
    beta: f64,
    degree: usize,
    period: u64,
    offset: f64,
}

impl LiveDriver {
    pub fn new(beta: f64, degree: usize) -> Self {
        LiveDriver {
            beta,
            degree,
            period: 0,
            offset: 0.0,
        }
    }

    /// Next attempted jump; restarts at each period boundary (memoryless).
    pub fn next_event<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(CyclicTime, usize)> {
        if self.degree == 0 {
            return None;
        }
        let rate = self.degree as f64;
        loop {
            let gap: f64 = Exp1.sample(rng);
            let s = self.offset + gap / rate;
            if s < self.beta && s > self.offset {
                self.offset = s;
                let dir = rng.random_range(0..self.degree);
                return Some((CyclicTime::new(self.period, s), dir));
            }
            if s >= self.beta {
                self.period += 1;
                self.offset = 0.0;
            }
        }
    }
}

/// Source of attempted jumps for [`drive`].
pub(crate) trait Attempts {
    fn next_attempt(&mut self) -> Option<(CyclicTime, usize)>;
}

struct Recorded<'a> {
    events: std::slice::Iter<'a, (CyclicTime, usize)>,
}

impl Attempts for Recorded<'_> {
    fn next_attempt(&mut self) -> Option<(CyclicTime, usize)> {
        self.events.next().copied()
    }
}

pub(crate) struct Live<'a, R: Rng> {
    pub driver: LiveDriver,
    pub rng: &'a mut R,
}

impl<R: Rng> Attempts for Live<'_, R> {
    fn next_attempt(&mut self) -> Option<(CyclicTime, usize)> {
        self.driver.next_event(self.rng)
    }
}

/// Builds the cyclic walk from `start` driven by a recorded driver sample.
///
/// An attempted jump at time `t` into a site the walk occupied at some
/// `t - kβ` (`k ≥ 1`) is suppressed; whenever the walk sits where its
/// history arrived at `t - kβ`, it replays that jump backwards.
pub fn simulate_driven_walk(
    topology: &Topology,
    start: &Site,
    driver: &DriverPath,
    horizon: CyclicTime,
    opts: WalkOptions,
) -> Result<WalkOutcome, WalkError> {
    if driver.horizon < horizon {
        return Err(WalkError::DriverTooShort {
            driver: driver.horizon,
            requested: horizon,
        });
    }
    if driver.degree != topology.degree() {
        return Err(WalkError::InvalidDriver(format!(
            "driver has {} directions, topology degree is {}",
            driver.degree,
            topology.degree()
        )));
    }
    let mut src = Recorded {
        events: driver.events.iter(),
    };
    drive(topology, start, driver.beta, horizon, &mut src, opts)
}

/// Builds the cyclic walk from `start` with a driver sampled on the fly from `rng`.
pub fn simulate_driven_live<R: Rng>(
    topology: &Topology,
    start: &Site,
    beta: f64,
    horizon: CyclicTime,
    rng: &mut R,
    opts: WalkOptions,
) -> Result<WalkOutcome, WalkError> {
    let mut src = Live {
        driver: LiveDriver::new(beta, topology.degree()),
        rng,
    };
    drive(topology, start, beta, horizon, &mut src, opts)
}

/// A stretch `[from, to)` of offsets in `period` during which the walk sat at a site.
#[derive(Clone, Copy)]
struct Stay {
    period: u64,
    from: f64,
    to: f64,
}

/// The walk arrived at a site at `(period, offset)` coming from `from`.
struct Arrival {
    period: u64,
    offset: f64,
    from: Site,
}

pub(crate) fn drive(
    topology: &Topology,
    start: &Site,
    beta: f64,
    horizon: CyclicTime,
    attempts: &mut impl Attempts,
    opts: WalkOptions,
) -> Result<WalkOutcome, WalkError> {
    check_beta(beta)?;
    if matches!(topology, Topology::Complete { .. }) {
        return Err(WalkError::UnsupportedTopology);
    }
    topology.validate(start)?;

    let mut stays: FxHashMap<Site, Vec<Stay>> = FxHashMap::default();
    let mut arrivals: FxHashMap<Site, Vec<Arrival>> = FxHashMap::default();
    let mut jumps: Vec<Jump> = Vec::new();

    let mut pos = start.clone();
    let mut now = CyclicTime::ZERO;
    let mut entered = 0.0;
    let mut pending = attempts.next_attempt();
    let mut tau_reg = None;

    loop {
        let k = now.period;
        let boundary = CyclicTime::periods(k + 1);
        let forced = arrivals.get(&pos).and_then(|list| {
            list.iter()
                .filter(|a| a.period < k && a.offset > now.offset)
                .min_by(|a, b| a.offset.total_cmp(&b.offset))
        });
        let forced_time = forced.map(|a| CyclicTime::new(k, a.offset));
        let attempt_time = pending.map(|(t, _)| t);

        let take_forced = match (forced_time, attempt_time) {
            (Some(f), Some(a)) => f <= a,
            (Some(_), None) => true,
            _ => false,
        };
        let next_time = if take_forced { forced_time } else { attempt_time };

        match next_time {
            Some(t) if t < boundary && t <= horizon => {
                let target = if take_forced {
                    forced.expect("forced").from.clone()
                } else {
                    let (_, dir) = pending.expect("attempt");
                    pending = attempts.next_attempt();
                    let target = topology.step(&pos, dir);
                    let blocked = stays.get(&target).is_some_and(|list| {
                        list.iter()
                            .any(|st| st.period < k && st.from <= t.offset && t.offset < st.to)
                    });
                    if blocked {
                        continue;
                    }
                    target
                };
                // records of the final period are never consulted
                if boundary <= horizon {
                    stays.entry(pos.clone()).or_default().push(Stay {
                        period: k,
                        from: entered,
                        to: t.offset,
                    });
                    arrivals.entry(target.clone()).or_default().push(Arrival {
                        period: k,
                        offset: t.offset,
                        from: pos.clone(),
                    });
                }
                pos = target;
                entered = t.offset;
                now = t;
                jumps.push(Jump {
                    time: t,
                    site: pos.clone(),
                });
            }
            _ if boundary <= horizon => {
                stays.entry(pos.clone()).or_default().push(Stay {
                    period: k,
                    from: entered,
                    to: beta,
                });
                entered = 0.0;
                now = boundary;
                if pos == *start {
                    tau_reg = Some(now);
                    break;
                }
            }
            _ => break,
        }
    }

    let end = match tau_reg {
        Some(tau) if opts.periodic_continuation => {
            // after closing, the walk repeats its first `tau` of history
            let period = tau.period;
            let base = jumps.clone();
            let mut shift = period;
            'outer: loop {
                for j in &base {
                    let t = j.time.plus_periods(shift);
                    if t > horizon {
                        break 'outer;
                    }
                    jumps.push(Jump {
                        time: t,
                        site: j.site.clone(),
                    });
                }
                if base.is_empty() {
                    break;
                }
                shift += period;
            }
            horizon
        }
        Some(tau) => tau,
        None => horizon,
    };

    Ok(WalkOutcome {
        trajectory: Trajectory::from_parts_unchecked(beta, start.clone(), CyclicTime::ZERO, jumps, end, Vec::new()),
        closed: tau_reg.is_some(),
        tau_reg,
        tie_events: 0,
    })
}
