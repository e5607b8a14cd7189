//! Experiment dispatch.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use stirring::diagnostics::{diagnose, DiagnosticsConfig, DiagnosticsReport, ProximityParams};
use stirring::estimators::{
    closure_probability, displacement_moments, interchange_replica, pair_replica, percolation_replica,
    relaxed_prevalence, tau_fast_tail, transition_probability_sup, Construction, Continuation, Ensemble, Estimate,
};
use stirring::interchange::build_permutation;
use stirring::walk::{simulate_cyclic_walk, CyclicTime, WalkOptions};
use stirring::{ClockStore, Site, Trajectory};

use crate::config::{Experiment, ExperimentConfig, Statistic};
use crate::output::RunDir;
use crate::CliError;

fn est_cols(e: &Estimate) -> [String; 5] {
    [
        e.value.to_string(),
        e.stderr.to_string(),
        e.ci95.0.to_string(),
        e.ci95.1.to_string(),
        e.samples.to_string(),
    ]
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn coords(s: &Site) -> String {
    s.coords().iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Runs the experiment and writes its outputs under `root`; returns the run directory.
pub fn run(config: &ExperimentConfig, root: &Path) -> Result<PathBuf, CliError> {
    let mut dir = RunDir::create(root, config)?;
    let topo = config.topology.build();
    let n = config.samples;
    let seed = config.seed;
    match &config.experiment {
        &Experiment::Interchange {
            beta,
            cutoff,
            dump_clocks,
        } => {
            let rows = (0..n)
                .into_par_iter()
                .map(|i| interchange_replica(&topo, beta, cutoff, seed, i))
                .collect::<Result<Vec<_>, _>>()?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.replica.to_string(),
                        r.vertex_count.to_string(),
                        r.beta.to_string(),
                        r.ring_count.to_string(),
                        r.cycle_count.to_string(),
                        r.top_lengths.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                        r.alpha_hat.to_string(),
                        r.tie_events.to_string(),
                    ]
                })
                .collect();
            dir.csv(
                "interchange.csv",
                &header(&[
                    "replica",
                    "vertex_count",
                    "beta",
                    "ring_count",
                    "cycle_count",
                    "top_lengths",
                    "alpha_hat",
                    "tie_events",
                ]),
                &table,
            )?;
            #[derive(Serialize)]
            struct Summary {
                cutoff: usize,
                alpha_hat: Estimate,
                cycle_count: Estimate,
            }
            let alphas: Vec<f64> = rows.iter().map(|r| r.alpha_hat).collect();
            let cycles: Vec<f64> = rows.iter().map(|r| r.cycle_count as f64).collect();
            dir.json(
                "summary.json",
                &Summary {
                    cutoff,
                    alpha_hat: Estimate::mean(&alphas),
                    cycle_count: Estimate::mean(&cycles),
                },
            )?;
            if dump_clocks {
                let mut store =
                    ClockStore::new(beta, stirring::rng::derive_seed(seed, [stirring::rng::tag::REPLICA, 0]))?;
                build_permutation(&topo, &mut store).map_err(|e| CliError::Run(e.to_string()))?;
                dump(&mut dir, &store)?;
            }
        }
        &Experiment::CyclicWalk {
            beta,
            horizon,
            construction,
            continuation,
            dump_clocks,
        } => {
            let ens = Ensemble {
                topology: topo.clone(),
                beta,
                horizon: CyclicTime::from_real(horizon, beta),
                samples: n,
                seed,
                construction,
                continuation,
            };
            let trajs: Vec<Trajectory> = ens.map(|_, t| t)?;
            let origin = topo.origin();
            let table: Vec<Vec<String>> = trajs
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let closure = (1..)
                        .map(CyclicTime::periods)
                        .take_while(|&c| c <= t.horizon())
                        .find(|&c| t.position_at(c) == t.start());
                    vec![
                        i.to_string(),
                        t.jumps().len().to_string(),
                        t.regen_marks().len().to_string(),
                        opt(closure.map(|c| c.period)),
                        t.duration().to_string(),
                        coords(t.end_position()),
                        t.end_position().dist2(&origin).to_string(),
                    ]
                })
                .collect();
            dir.csv(
                "walks.csv",
                &header(&[
                    "replica",
                    "jumps",
                    "regenerations",
                    "first_closure",
                    "duration",
                    "end",
                    "end_dist2",
                ]),
                &table,
            )?;
            dir.jsonl("trajectories.jsonl", trajs.iter().map(Trajectory::to_json_line))?;
            if dump_clocks && construction == Construction::Exposure {
                let mut store = ClockStore::new(beta, ens.clock_seed(0))?;
                let opts = match continuation {
                    Continuation::Periodic => WalkOptions::periodic(),
                    _ => WalkOptions::default(),
                };
                simulate_cyclic_walk(&topo, &origin, ens.horizon, &mut store, opts)?;
                dump(&mut dir, &store)?;
            }
        }
        Experiment::Diagnostics {
            beta,
            horizon,
            epsilon,
            fast_levels,
        } => {
            let d = topo.dim();
            let cfg = DiagnosticsConfig::with_epsilon(*epsilon, *beta);
            cfg.validate()?;
            let ens = Ensemble::lattice(d, *beta, *horizon, n, seed)?;
            let reports: Vec<DiagnosticsReport> = ens.map(|_, t| diagnose(&t, &cfg, fast_levels))?;
            #[derive(Serialize)]
            struct Line<'a> {
                replica: usize,
                report: &'a DiagnosticsReport,
            }
            dir.jsonl(
                "diagnostics.jsonl",
                reports
                    .iter()
                    .enumerate()
                    .map(|(replica, report)| serde_json::to_string(&Line { replica, report }).expect("serializable")),
            )?;
            let mut h = vec!["replica".to_string()];
            h.extend(DiagnosticsReport::csv_header(fast_levels));
            let table: Vec<Vec<String>> = reports
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut row = vec![i.to_string()];
                    row.extend(r.csv_record());
                    row
                })
                .collect();
            dir.csv("diagnostics.csv", &h, &table)?;
            dir.json("diagnostics_config.json", &cfg)?;
        }
        Experiment::Sweep {
            betas,
            statistics,
            horizon,
            horizon_per_beta,
            k_max,
            fast_levels,
        } => {
            let d = topo.dim();
            let mut table = Vec::new();
            let mut points = Vec::new();
            for &beta in betas {
                let t = horizon.or(horizon_per_beta.map(|c| c * beta));
                for &stat in statistics {
                    let mut row = |name: String, e: &Estimate, t: Option<f64>, note: String| {
                        let mut r = vec![beta.to_string(), name, opt(t)];
                        r.extend(est_cols(e));
                        r.push(note);
                        table.push(r);
                    };
                    let detail = match stat {
                        Statistic::Closure => {
                            let e = closure_probability(d, beta, *k_max, n, seed)?;
                            row("closure".into(), &e, None, format!("k_max={k_max}"));
                            serde_json::to_value(e)
                        }
                        Statistic::Sigma => {
                            let t = t.expect("validated");
                            let m = displacement_moments(d, beta, t, n, seed)?;
                            // delta method on the mean diagonal
                            let se_diag =
                                (0..d).map(|i| m.covariance_stderr[i][i].powi(2)).sum::<f64>().sqrt() / d as f64;
                            let se = se_diag / (2.0 * t * m.sigma_hat);
                            let e = Estimate {
                                value: m.sigma_hat,
                                stderr: se,
                                samples: m.samples,
                                ci95: (m.sigma_hat - 1.96 * se, m.sigma_hat + 1.96 * se),
                                method: stirring::estimators::CiMethod::Normal,
                            };
                            row(
                                "sigma".into(),
                                &e,
                                Some(t),
                                format!(
                                    "diagonal_spread={};max_offdiag_ratio={}",
                                    m.diagonal_spread, m.max_offdiag_ratio
                                ),
                            );
                            serde_json::to_value(m)
                        }
                        Statistic::TransitionSup => {
                            let t = t.expect("validated");
                            let r = transition_probability_sup(d, beta, t, n, seed)?;
                            row(
                                "transition-sup".into(),
                                &r.estimate,
                                Some(t),
                                format!("bound={};passes={}", r.bound, r.passes),
                            );
                            serde_json::to_value(r)
                        }
                        Statistic::TauFast => {
                            let t = t.expect("validated");
                            let r = tau_fast_tail(d, beta, t, fast_levels, n, seed)?;
                            for (l, e) in &r.points {
                                row(format!("tau-fast:{l}"), e, Some(t), String::new());
                            }
                            serde_json::to_value(r)
                        }
                        Statistic::Relaxed => {
                            let t = t.expect("validated");
                            let cfg = DiagnosticsConfig::for_dimension(d, beta);
                            let r = relaxed_prevalence(d, beta, t, n, seed, &cfg)?;
                            row(
                                "relaxed".into(),
                                &r.relaxed_paths,
                                Some(t),
                                format!("mean_relaxed_fraction={}", r.relaxed_fraction.value),
                            );
                            serde_json::to_value(r)
                        }
                    }
                    .expect("serializable");
                    points.push(serde_json::json!({ "beta": beta, "statistic": stat, "result": detail }));
                }
            }
            dir.csv(
                "sweep.csv",
                &header(&[
                    "beta",
                    "statistic",
                    "t",
                    "value",
                    "stderr",
                    "ci_low",
                    "ci_high",
                    "samples",
                    "note",
                ]),
                &table,
            )?;
            dir.json("sweep.json", &points)?;
        }
        &Experiment::Percolation { beta, cap, k_max } => {
            let rows = (0..n)
                .into_par_iter()
                .map(|i| percolation_replica(&topo, beta, seed, i, cap, k_max))
                .collect::<Result<Vec<_>, _>>()?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.replica.to_string(),
                        r.cluster_size.to_string(),
                        r.cap_exceeded.to_string(),
                        opt(r.closure),
                        opt(r.violations),
                    ]
                })
                .collect();
            dir.csv(
                "percolation.csv",
                &header(&["replica", "cluster_size", "cap_exceeded", "closure", "violations"]),
                &table,
            )?;
            #[derive(Serialize)]
            struct Summary {
                cap_exceeded: Estimate,
                violations: usize,
                unclosed: usize,
            }
            dir.json(
                "summary.json",
                &Summary {
                    cap_exceeded: Estimate::proportion(rows.iter().filter(|r| r.cap_exceeded).count() as u64, n as u64),
                    violations: rows.iter().filter_map(|r| r.violations).sum(),
                    unclosed: rows.iter().filter(|r| r.closure.is_none()).count(),
                },
            )?;
        }
        &Experiment::PairProximity { beta, scale, t0 } => {
            let d = topo.dim();
            let params = ProximityParams::new(scale, t0)?;
            let rows = (0..n)
                .into_par_iter()
                .map(|i| pair_replica(d, beta, &params, seed, i))
                .collect::<Result<Vec<_>, _>>()?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        i.to_string(),
                        r.measure.to_string(),
                        r.window.to_string(),
                        opt(r.merge_time.map(|m| m.total(beta))),
                        r.non_merge.to_string(),
                        r.exceeds_budget.to_string(),
                        opt(r.tau_reg[0].map(|m| m.total(beta))),
                        opt(r.tau_reg[1].map(|m| m.total(beta))),
                    ]
                })
                .collect();
            dir.csv(
                "proximity.csv",
                &header(&[
                    "replica",
                    "measure",
                    "window",
                    "merge_time",
                    "non_merge",
                    "exceeds_budget",
                    "tau_reg_1",
                    "tau_reg_2",
                ]),
                &table,
            )?;
            #[derive(Serialize)]
            struct Summary {
                radius: f64,
                budget: f64,
                reduced_horizon: f64,
                exceeds_budget: Estimate,
                non_merge: Estimate,
            }
            let count =
                |f: fn(&stirring::diagnostics::PairProximity) -> bool| rows.iter().filter(|r| f(r)).count() as u64;
            dir.json(
                "summary.json",
                &Summary {
                    radius: params.radius(),
                    budget: params.budget(),
                    reduced_horizon: params.reduced_horizon(),
                    exceeds_budget: Estimate::proportion(count(|r| r.exceeds_budget), n as u64),
                    non_merge: Estimate::proportion(count(|r| r.non_merge), n as u64),
                },
            )?;
        }
    }
    dir.finish()
}

fn dump(dir: &mut RunDir, store: &ClockStore) -> Result<(), CliError> {
    let mut body = Vec::new();
    store.dump_jsonl(&mut body)?;
    dir.jsonl_bytes("clocks.jsonl", &body)
}
