use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{check_samples, replica_rng, Ensemble, Estimate, EstimatorError};
use crate::diagnostics::{relaxed_times, tau_fast, DiagnosticsConfig};
use crate::graph::{Site, Topology};
use crate::stats::ols_slope;
use crate::walk::{simulate_driven_live, CyclicTime, WalkOptions};

/// Below this many hits the histogram mode is mostly noise.
const MIN_MODE_COUNT: u64 = 10;

/// Empirical `sup_u P(W(t) = u)` against the bound `t^(-d/2 + 0.1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSup {
    pub t: f64,
    pub estimate: Estimate,
    pub argmax: Site,
    pub mode_count: u64,
    pub distinct_sites: usize,
    pub bound: f64,
    /// The upper end of the confidence interval is below the bound.
    pub passes: bool,
    pub warning: Option<String>,
}

impl TransitionSup {
    pub fn from_histogram(hist: &FxHashMap<Site, u64>, samples: u64, d: usize, t: f64) -> TransitionSup {
        let (argmax, mode_count) = hist
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(s, &c)| (s.clone(), c))
            .unwrap_or_else(|| (Site::origin(d), 0));
        let estimate = Estimate::proportion(mode_count, samples);
        let bound = t.powf(-(d as f64) / 2.0 + 0.1);
        let warning = (mode_count < MIN_MODE_COUNT).then(|| {
            format!("the most visited endpoint was hit only {mode_count} times; the sup estimate is noise dominated")
        });
        TransitionSup {
            t,
            estimate,
            argmax,
            mode_count,
            distinct_sites: hist.len(),
            bound,
            passes: estimate.ci95.1 <= bound,
            warning,
        }
    }
}

impl Ensemble {
    /// Endpoint counts of every replica.
    pub fn histogram(&self) -> Result<FxHashMap<Site, u64>, EstimatorError> {
        (0..self.samples)
            .into_par_iter()
            .try_fold(FxHashMap::default, |mut h: FxHashMap<Site, u64>, i| {
                let traj = self.replica(i)?;
                *h.entry(traj.end_position().clone()).or_default() += 1;
                Ok::<_, EstimatorError>(h)
            })
            .try_reduce(FxHashMap::default, |mut a, b| {
                for (s, c) in b {
                    *a.entry(s).or_default() += c;
                }
                Ok(a)
            })
    }
}

/// `sup_u P(W(t) = u)` for the regenerated walk on `Z^d`.
pub fn transition_probability_sup(
    d: usize,
    beta: f64,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<TransitionSup, EstimatorError> {
    check_samples(samples)?;
    if t <= 0.0 {
        return Err(EstimatorError::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let hist = Ensemble::lattice(d, beta, t, samples, seed)?.histogram()?;
    Ok(TransitionSup::from_histogram(&hist, samples as u64, d, t))
}

/// First and second moments of `W(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementMoments {
    pub t: f64,
    pub samples: u64,
    pub mean: Vec<Estimate>,
    pub covariance: Vec<Vec<f64>>,
    pub covariance_stderr: Vec<Vec<f64>>,
    /// `sqrt(mean diagonal of Cov / t)`.
    pub sigma_hat: f64,
    /// Largest `|Cov_ij| / mean diagonal` over `i ≠ j`.
    pub max_offdiag_ratio: f64,
    /// `(max diagonal - min diagonal) / mean diagonal`.
    pub diagonal_spread: f64,
}

impl DisplacementMoments {
    pub fn from_endpoints(ends: &[Site], d: usize, t: f64) -> DisplacementMoments {
        let n = ends.len() as f64;
        let xs: Vec<Vec<f64>> = (0..d).map(|i| ends.iter().map(|s| s[i] as f64).collect()).collect();
        let mean: Vec<Estimate> = xs.iter().map(|x| Estimate::mean(x)).collect();
        let mut covariance = vec![vec![0.0; d]; d];
        let mut covariance_stderr = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in i..d {
                let (mi, mj) = (mean[i].value, mean[j].value);
                let prods: Vec<f64> = xs[i].iter().zip(&xs[j]).map(|(a, b)| (a - mi) * (b - mj)).collect();
                let e = Estimate::mean(&prods);
                let c = e.value * n / (n - 1.0).max(1.0);
                covariance[i][j] = c;
                covariance[j][i] = c;
                covariance_stderr[i][j] = e.stderr;
                covariance_stderr[j][i] = e.stderr;
            }
        }
        let diag: Vec<f64> = (0..d).map(|i| covariance[i][i]).collect();
        let mean_diag = diag.iter().sum::<f64>() / d as f64;
        let max_diag = diag.iter().copied().fold(f64::MIN, f64::max);
        let min_diag = diag.iter().copied().fold(f64::MAX, f64::min);
        let max_offdiag = covariance
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(move |&(j, _)| j != i)
                    .map(|(_, c)| c.abs())
            })
            .fold(0.0, f64::max);
        DisplacementMoments {
            t,
            samples: ends.len() as u64,
            mean,
            covariance,
            covariance_stderr,
            sigma_hat: (mean_diag / t).sqrt(),
            max_offdiag_ratio: max_offdiag / mean_diag,
            diagonal_spread: (max_diag - min_diag) / mean_diag,
        }
    }
}

pub fn displacement_moments(
    d: usize,
    beta: f64,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<DisplacementMoments, EstimatorError> {
    check_samples(samples)?;
    let ends = Ensemble::lattice(d, beta, t, samples, seed)?.endpoints()?;
    Ok(DisplacementMoments::from_endpoints(&ends, d, t))
}

/// Closure period of each driven cyclic walk on `Z^d`, if it closes within `k_max` periods.
///
/// The walks for a larger `k_max` extend those for a smaller one, so the
/// closure fraction is monotone in `k_max` on shared seeds.
pub fn closure_times(
    d: usize,
    beta: f64,
    k_max: u64,
    samples: usize,
    seed: u64,
) -> Result<Vec<Option<u64>>, EstimatorError> {
    check_samples(samples)?;
    if k_max == 0 {
        return Err(EstimatorError::InvalidParameter("K_max must be at least 1".into()));
    }
    let topo = Topology::lattice(d)?;
    let start = topo.origin();
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = replica_rng(seed, i);
            let out = simulate_driven_live(
                &topo,
                &start,
                beta,
                CyclicTime::periods(k_max),
                &mut r,
                WalkOptions::default(),
            )?;
            Ok(out.tau_reg.map(|t| t.period))
        })
        .collect()
}

/// Fraction of cyclic walks closing within `k_max` periods: a lower bound for `P(τ_reg < ∞)`.
pub fn closure_probability(
    d: usize,
    beta: f64,
    k_max: u64,
    samples: usize,
    seed: u64,
) -> Result<Estimate, EstimatorError> {
    let times = closure_times(d, beta, k_max, samples, seed)?;
    Ok(Estimate::proportion(
        times.iter().flatten().count() as u64,
        samples as u64,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureSweep {
    pub d: usize,
    pub k_max: u64,
    pub points: Vec<(f64, Estimate)>,
    /// Slope of `log p` against `log β` over the points with `p > 0`.
    pub log_log_slope: Option<f64>,
    pub strictly_decreasing: bool,
}

pub fn closure_sweep(
    d: usize,
    betas: &[f64],
    k_max: u64,
    samples: usize,
    seed: u64,
) -> Result<ClosureSweep, EstimatorError> {
    let points = betas
        .iter()
        .map(|&b| Ok((b, closure_probability(d, b, k_max, samples, seed)?)))
        .collect::<Result<Vec<_>, EstimatorError>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(_, e)| e.value > 0.0)
        .map(|(b, e)| (b.ln(), e.value.ln()))
        .unzip();
    Ok(ClosureSweep {
        d,
        k_max,
        log_log_slope: (x.len() >= 2).then(|| ols_slope(&x, &y)),
        strictly_decreasing: points.windows(2).all(|w| w[1].1.value < w[0].1.value),
        points,
    })
}

/// `P(τ_fast(L) < t)` across levels `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauFastTail {
    pub t: f64,
    pub points: Vec<(f64, Estimate)>,
    /// Natural log of each estimate; `None` where no replica hit the level.
    pub log_survival: Vec<Option<f64>>,
    /// Slope of the log-survival against `L` over the levels with hits.
    pub slope: Option<f64>,
    pub non_increasing: bool,
    /// Strictly decreasing until the estimate first reaches zero.
    pub strictly_decreasing: bool,
}

pub fn tau_fast_tail(
    d: usize,
    beta: f64,
    t: f64,
    levels: &[f64],
    samples: usize,
    seed: u64,
) -> Result<TauFastTail, EstimatorError> {
    check_samples(samples)?;
    let ens = Ensemble::lattice(d, beta, t, samples, seed)?;
    let hits = ens.map(|_, traj| {
        let h = traj.horizon();
        levels
            .iter()
            .map(|&l| tau_fast(&traj, l).is_some_and(|s| s < h))
            .collect::<Vec<bool>>()
    })?;
    let points: Vec<(f64, Estimate)> = levels
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let c = hits.iter().filter(|h| h[k]).count() as u64;
            (l, Estimate::proportion(c, samples as u64))
        })
        .collect();
    let log_survival: Vec<Option<f64>> = points
        .iter()
        .map(|(_, e)| (e.value > 0.0).then(|| e.value.ln()))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .zip(&log_survival)
        .filter_map(|((l, _), y)| y.map(|y| (*l, y)))
        .unzip();
    let v: Vec<f64> = points.iter().map(|(_, e)| e.value).collect();
    Ok(TauFastTail {
        t,
        slope: (x.len() >= 2).then(|| ols_slope(&x, &y)),
        non_increasing: v.windows(2).all(|w| w[1] <= w[0]),
        strictly_decreasing: v.windows(2).all(|w| if w[0] > 0.0 { w[1] < w[0] } else { w[1] == 0.0 }),
        log_survival,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedPrevalence {
    pub horizon: f64,
    pub scale: Option<u32>,
    pub required_fraction: Option<f64>,
    /// Fraction of replicas whose path is relaxed.
    pub relaxed_paths: Estimate,
    /// Mean fraction of relaxed time per replica.
    pub relaxed_fraction: Estimate,
}

pub fn relaxed_prevalence(
    d: usize,
    beta: f64,
    horizon: f64,
    samples: usize,
    seed: u64,
    cfg: &DiagnosticsConfig,
) -> Result<RelaxedPrevalence, EstimatorError> {
    check_samples(samples)?;
    cfg.validate()?;
    let ens = Ensemble::lattice(d, beta, horizon, samples, seed)?;
    let reports = ens.map(|_, traj| relaxed_times(&traj, cfg))?;
    let relaxed = reports.iter().filter(|r| r.relaxed_path == Some(true)).count() as u64;
    let fractions: Vec<f64> = reports.iter().map(|r| r.fraction).collect();
    Ok(RelaxedPrevalence {
        horizon,
        scale: reports[0].scale,
        required_fraction: reports[0].required_fraction,
        relaxed_paths: Estimate::proportion(relaxed, samples as u64),
        relaxed_fraction: Estimate::mean(&fractions),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_times_concentrate_at_the_origin() {
        let r = transition_probability_sup(3, 4.0, 0.01, 2000, 1).unwrap();
        assert_eq!(r.argmax, Site::origin(3));
        // P(no jump by 0.01) = e^{-0.06}
        assert!(r.estimate.contains((-0.06f64).exp()) || (r.estimate.value - (-0.06f64).exp()).abs() < 0.02);
        assert!(r.warning.is_none());
    }

    #[test]
    fn sparse_histograms_are_flagged() {
        let r = transition_probability_sup(5, 64.0, 20.0, 200, 2).unwrap();
        assert!(r.warning.is_some());
        assert!(r.estimate.value > 0.0);
    }

    #[test]
    fn first_period_variance_is_two_t() {
        let m = displacement_moments(2, 10.0, 3.0, 20_000, 3).unwrap();
        for i in 0..2 {
            let v = m.covariance[i][i];
            assert!((v - 6.0).abs() < 4.0 * m.covariance_stderr[i][i], "{v}");
            assert!(m.mean[i].value.abs() < 4.0 * m.mean[i].stderr);
        }
        assert!((m.sigma_hat - 2f64.sqrt()).abs() < 0.03);
    }

    #[test]
    fn closure_is_monotone_in_k_max() {
        let short = closure_probability(2, 1.0, 4, 300, 11).unwrap();
        let long = closure_probability(2, 1.0, 16, 300, 11).unwrap();
        assert!(short.value <= long.value);
        let times = closure_times(2, 1.0, 16, 300, 11).unwrap();
        assert!(times.iter().flatten().all(|&k| (1..=16).contains(&k)));
    }

    #[test]
    fn one_dimensional_walks_close() {
        let e = closure_probability(1, 1.0, 64, 300, 4).unwrap();
        assert!(e.value > 0.9, "{e:?}");
    }

    #[test]
    fn closure_validates_k_max() {
        assert!(closure_times(2, 1.0, 0, 10, 1).is_err());
        assert!(closure_times(2, 1.0, 1, 0, 1).is_err());
    }

    #[test]
    fn tau_fast_tail_is_nested() {
        let r = tau_fast_tail(3, 4.0, 8.0, &[1.0, 2.0, 3.0, 4.0, 6.0], 400, 5).unwrap();
        assert!(r.non_increasing);
        assert_eq!(r.points[0].1.value, 1.0);
        assert!(r.slope.unwrap() < 0.0);
    }
}
