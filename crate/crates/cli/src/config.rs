//! The versioned TOML experiment configuration.

use serde::{Deserialize, Serialize};
use stirring::estimators::Continuation;
use stirring::graph::Topology;
use stirring::walk::DEFAULT_K_MAX;

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: Option<u32>,
    kind: Option<String>,
    seed: Option<u64>,
    samples: Option<u64>,
    threads: Option<u64>,
    out: Option<String>,
    topology: Option<RawTopology>,
    beta: Option<f64>,
    betas: Option<Vec<f64>>,
    horizon: Option<f64>,
    horizon_per_beta: Option<f64>,
    k_max: Option<u64>,
    cap: Option<u64>,
    cutoff: Option<u64>,
    construction: Option<String>,
    continuation: Option<String>,
    statistics: Option<Vec<String>>,
    fast_levels: Option<Vec<f64>>,
    epsilon: Option<f64>,
    scale: Option<u32>,
    t0: Option<f64>,
    dump_clocks: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    kind: Option<String>,
    d: Option<u64>,
    side: Option<u64>,
    n: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TopologySpec {
    Lattice { d: usize },
    Torus { d: usize, side: i64 },
    Complete { n: usize },
}

impl TopologySpec {
    pub fn build(&self) -> Topology {
        match *self {
            TopologySpec::Lattice { d } => Topology::lattice(d),
            TopologySpec::Torus { d, side } => Topology::torus(d, side),
            TopologySpec::Complete { n } => Topology::complete(n),
        }
        .expect("validated topology")
    }

    pub fn dim(&self) -> Option<usize> {
        match *self {
            TopologySpec::Lattice { d } | TopologySpec::Torus { d, .. } => Some(d),
            TopologySpec::Complete { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Closure,
    Sigma,
    TransitionSup,
    TauFast,
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Interchange {
        beta: f64,
        cutoff: usize,
        dump_clocks: bool,
    },
    CyclicWalk {
        beta: f64,
        horizon: f64,
        construction: stirring::estimators::Construction,
        continuation: Continuation,
        dump_clocks: bool,
    },
    Diagnostics {
        beta: f64,
        horizon: f64,
        epsilon: f64,
        fast_levels: Vec<f64>,
    },
    Sweep {
        betas: Vec<f64>,
        statistics: Vec<Statistic>,
        horizon: Option<f64>,
        horizon_per_beta: Option<f64>,
        k_max: u64,
        fast_levels: Vec<f64>,
    },
    Percolation {
        beta: f64,
        cap: usize,
        k_max: u64,
    },
    PairProximity {
        beta: f64,
        scale: u32,
        t0: f64,
    },
}

/// A fully resolved, validated configuration. Its JSON form is hashed to
/// name the output directory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    pub samples: usize,
    pub topology: TopologySpec,
    pub experiment: Experiment,
}

/// Settings that do not change results.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSettings {
    pub threads: Option<usize>,
    pub out: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<String>,
}

fn err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn required<T>(v: Option<T>, field: &str) -> Result<T, CliError> {
    v.ok_or_else(|| err(field, "missing required field"))
}

fn positive(v: f64, field: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(err(field, format!("must be positive and finite, got {v}")))
    }
}

fn at_least(v: u64, min: u64, field: &str) -> Result<u64, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(err(field, format!("must be at least {min}, got {v}")))
    }
}

/// The key on the line containing byte `pos` of `text`.
fn key_at(text: &str, pos: usize) -> Option<String> {
    let start = text[..pos.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let key = line.split('=').next()?.trim().trim_matches(['[', ']']).trim();
    (!key.is_empty()).then(|| key.to_string())
}

/// Parses and validates a TOML configuration.
pub fn parse(text: &str, overrides: &Overrides) -> Result<(ExperimentConfig, RunSettings), CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let field = message
            .strip_prefix("unknown field `")
            .and_then(|r| r.split('`').next())
            .map(str::to_string)
            .or_else(|| e.span().and_then(|s| key_at(text, s.start)))
            .unwrap_or_else(|| "<document>".to_string());
        err(&field, message)
    })?;
    resolve(raw, overrides)
}

fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<(ExperimentConfig, RunSettings), CliError> {
    let version = required(raw.version, "version")?;
    if version != CONFIG_VERSION {
        return Err(err(
            "version",
            format!("unsupported config version {version}; this build reads {CONFIG_VERSION}"),
        ));
    }
    let seed = required(overrides.seed.or(raw.seed), "seed")?;
    let samples = at_least(required(raw.samples, "samples")?, 1, "samples")? as usize;
    let threads = match overrides.threads.map(|t| t as u64).or(raw.threads) {
        Some(t) => Some(at_least(t, 1, "threads")? as usize),
        None => None,
    };
    let settings = RunSettings {
        threads,
        out: overrides.out.clone().or(raw.out.clone()),
    };
    let topology = topology(raw.topology.as_ref())?;
    let kind = required(raw.kind.clone(), "kind")?;
    let k_max = at_least(raw.k_max.unwrap_or(DEFAULT_K_MAX), 1, "k_max")?;
    let beta = || positive(required(raw.beta, "beta")?, "beta");
    let horizon = || positive(required(raw.horizon, "horizon")?, "horizon");
    let lattice_only = |what: &str| {
        if matches!(topology, TopologySpec::Lattice { .. }) {
            Ok(())
        } else {
            Err(err("topology.kind", format!("{what} runs on the lattice Z^d")))
        }
    };
    let fast_levels = |default: Vec<f64>| -> Result<Vec<f64>, CliError> {
        let v = raw.fast_levels.clone().unwrap_or(default);
        for &l in &v {
            positive(l, "fast_levels")?;
        }
        Ok(v)
    };

    let experiment = match kind.as_str() {
        "interchange" => {
            let v = match topology {
                TopologySpec::Lattice { .. } => {
                    return Err(err("topology.kind", "the interchange process needs a finite graph (torus or complete)"))
                }
                _ => topology.build().vertex_count().expect("finite"),
            };
            Experiment::Interchange {
                beta: beta()?,
                cutoff: match raw.cutoff {
                    Some(c) => at_least(c, 1, "cutoff")? as usize,
                    None => stirring::interchange::default_cutoff(v),
                },
                dump_clocks: raw.dump_clocks.unwrap_or(false),
            }
        }
        "cyclic-walk" => {
            let construction = match raw.construction.as_deref().unwrap_or("exposure") {
                "exposure" => stirring::estimators::Construction::Exposure,
                "driven" => stirring::estimators::Construction::Driven,
                other => return Err(err("construction", format!("expected exposure or driven, got {other:?}"))),
            };
            if construction == stirring::estimators::Construction::Driven
                && matches!(topology, TopologySpec::Complete { .. })
            {
                return Err(err("construction", "the driven construction needs a lattice or torus"));
            }
            let continuation = match raw.continuation.as_deref().unwrap_or("regenerate") {
                "stop" => Continuation::Stop,
                "periodic" => Continuation::Periodic,
                "regenerate" => Continuation::Regenerate,
                other => {
                    return Err(err("continuation", format!("expected stop, periodic or regenerate, got {other:?}")))
                }
            };
            let dump_clocks = raw.dump_clocks.unwrap_or(false);
            if dump_clocks && construction != stirring::estimators::Construction::Exposure {
                return Err(err("dump_clocks", "only the exposure construction uses clocks"));
            }
            Experiment::CyclicWalk {
                beta: beta()?,
                horizon: horizon()?,
                construction,
                continuation,
                dump_clocks,
            }
        }
        "diagnostics" => {
            lattice_only("diagnostics")?;
            let d = topology.dim().expect("lattice");
            Experiment::Diagnostics {
                beta: beta()?,
                horizon: horizon()?,
                epsilon: match raw.epsilon {
                    Some(e) if e > 0.0 && e < 1.0 => e,
                    Some(e) => return Err(err("epsilon", format!("must lie in (0, 1), got {e}"))),
                    None => 1.0 / (200.0 * d as f64),
                },
                fast_levels: fast_levels(vec![2.0, 4.0, 8.0])?,
            }
        }
        "sweep" => {
            lattice_only("a sweep")?;
            let betas = required(raw.betas.clone(), "betas")?;
            if betas.is_empty() {
                return Err(err("betas", "must not be empty"));
            }
            for &b in &betas {
                positive(b, "betas")?;
            }
            let names = required(raw.statistics.clone(), "statistics")?;
            if names.is_empty() {
                return Err(err("statistics", "must not be empty"));
            }
            let mut statistics = Vec::new();
            for s in &names {
                statistics.push(match s.as_str() {
                    "closure" => Statistic::Closure,
                    "sigma" => Statistic::Sigma,
                    "transition-sup" => Statistic::TransitionSup,
                    "tau-fast" => Statistic::TauFast,
                    "relaxed" => Statistic::Relaxed,
                    other => {
                        return Err(err(
                            "statistics",
                            format!("unknown statistic {other:?}; expected closure, sigma, transition-sup, tau-fast or relaxed"),
                        ))
                    }
                });
            }
            let horizon = raw.horizon.map(|h| positive(h, "horizon")).transpose()?;
            let per_beta = raw.horizon_per_beta.map(|h| positive(h, "horizon_per_beta")).transpose()?;
            if horizon.is_some() && per_beta.is_some() {
                return Err(err("horizon_per_beta", "give either horizon or horizon_per_beta, not both"));
            }
            let timed = statistics.iter().any(|s| *s != Statistic::Closure);
            if timed && horizon.is_none() && per_beta.is_none() {
                return Err(err("horizon", "required by the requested statistics (or give horizon_per_beta)"));
            }
            Experiment::Sweep {
                betas,
                statistics,
                horizon,
                horizon_per_beta: per_beta,
                k_max,
                fast_levels: fast_levels(vec![2.0, 4.0, 8.0])?,
            }
        }
        "percolation" => {
            lattice_only("percolation")?;
            Experiment::Percolation {
                beta: beta()?,
                cap: at_least(raw.cap.unwrap_or(10_000), 1, "cap")? as usize,
                k_max,
            }
        }
        "pair-proximity" => {
            lattice_only("pair proximity")?;
            let scale = raw.scale.unwrap_or(1);
            let t0 = raw.t0.unwrap_or(2.0);
            stirring::diagnostics::ProximityParams::new(scale, t0)
                .map_err(|e| err(if scale == 0 { "scale" } else { "t0" }, e.to_string()))?;
            Experiment::PairProximity {
                beta: beta()?,
                scale,
                t0,
            }
        }
        other => {
            return Err(err(
                "kind",
                format!("unknown experiment {other:?}; expected interchange, cyclic-walk, diagnostics, sweep, percolation or pair-proximity"),
            ))
        }
    };
    Ok((
        ExperimentConfig {
            version,
            seed,
            samples,
            topology,
            experiment,
        },
        settings,
    ))
}

fn topology(raw: Option<&RawTopology>) -> Result<TopologySpec, CliError> {
    let raw = raw.ok_or_else(|| err("topology", "missing required table"))?;
    let dim = || {
        let d = required(raw.d, "topology.d")?;
        if (1..=16).contains(&d) {
            Ok(d as usize)
        } else {
            Err(err("topology.d", format!("must lie in 1..=16, got {d}")))
        }
    };
    match raw.kind.as_deref().unwrap_or("lattice") {
        "lattice" => Ok(TopologySpec::Lattice { d: dim()? }),
        "torus" => {
            let d = dim()?;
            let side = at_least(required(raw.side, "topology.side")?, 3, "topology.side")?;
            if (side as f64).powi(d as i32) > 1e7 {
                return Err(err("topology.side", "torus has more than 10^7 vertices"));
            }
            Ok(TopologySpec::Torus { d, side: side as i64 })
        }
        "complete" => Ok(TopologySpec::Complete {
            n: at_least(required(raw.n, "topology.n")?, 2, "topology.n")? as usize,
        }),
        other => Err(err(
            "topology.kind",
            format!("expected lattice, torus or complete, got {other:?}"),
        )),
    }
}
