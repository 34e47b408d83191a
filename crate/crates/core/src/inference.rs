//! Inference for α (bootstrap test, percentile and curvature intervals) and
//! Monte-Carlo estimation of the normal mass left outside the simplex.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::estimation::{fit_alpha_with, loglik_alpha0, AlphaSearch, FitResult};
use crate::geometry::fold::min_margin;
use crate::geometry::{clr_inverse, z_alpha, HelmertSubmatrix};
use crate::model::FoldedNormalParams;
use crate::seed::{derive_seed, derived_rng};

/// Default bootstrap size for tests.
pub const DEFAULT_TEST_REPLICATES: usize = 299;
/// Default bootstrap size for intervals.
pub const DEFAULT_CI_REPLICATES: usize = 1000;
/// Default step of the curvature interval.
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-2;
/// Redraws allowed for a failing bootstrap replicate.
pub const MAX_RETRIES: usize = 3;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapStatistic {
    /// Compare bootstrap α̂ with the observed α̂.
    Alpha,
    /// Compare `2(ℓ(α̂) − ℓ(0))` with its observed value.
    LogLikelihoodRatio,
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapOptions {
    pub statistic: BootstrapStatistic,
    /// α search used for the observed data and every replicate.
    pub search: AlphaSearch,
    pub max_retries: usize,
    /// Percentile intervals only: search each replicate on an expanding
    /// window of this half-width around the observed α̂ instead of the full
    /// grid.
    pub replicate_window: Option<f64>,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            statistic: BootstrapStatistic::Alpha,
            search: AlphaSearch::default(),
            max_retries: MAX_RETRIES,
            replicate_window: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapTestResult {
    pub alpha_obs: f64,
    pub alpha_boot: Vec<f64>,
    pub p_value: f64,
    pub statistic: BootstrapStatistic,
    /// Observed value of the chosen statistic (α̂ or the LR statistic).
    pub observed_statistic: f64,
    pub boot_statistics: Vec<f64>,
    /// Replicates redrawn after a failed refit.
    pub redraws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub standard_error: Option<f64>,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapInterval {
    pub interval: Interval,
    pub alpha_boot: Vec<f64>,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutsideProbability {
    pub total: f64,
    /// Mass attributed to each violated constraint `1 + α·(Hᵀy)_i ≤ 0`.
    pub per_component: Vec<f64>,
    pub counts: Vec<u64>,
    pub draws: u64,
}

/// `(#{s_b ≥ s_obs} + 1)/(B + 1)`.
pub fn bootstrap_p_value(observed: f64, boot: &[f64]) -> f64 {
    let exceed = boot.iter().filter(|&&s| s >= observed).count();
    (exceed + 1) as f64 / (boot.len() + 1) as f64
}

/// Type-1 sample quantile of sorted values: the order statistic `⌈B·q⌉`.
pub fn quantile_type1(sorted: &[f64], q: f64) -> f64 {
    let b = sorted.len();
    let k = ((b as f64 * q) - 1e-9).ceil().max(1.0) as usize;
    sorted[k.min(b) - 1]
}

fn lr_statistic(fit: &FitResult, data: &DataMatrix) -> Result<f64> {
    let l0 = loglik_alpha0(data)?.log_likelihood;
    Ok(2.0 * (fit.log_likelihood - l0))
}

/// Maps every row to `clr⁻¹(Hᵀ z_α(x))`, the composition whose ilr
/// coordinates equal its α-transform.
pub fn null_transform(data: &DataMatrix, alpha: f64) -> Result<DataMatrix> {
    if alpha == 0.0 {
        return Ok(data.clone());
    }
    let helmert = HelmertSubmatrix::new(data.parts())?;
    let rows = data
        .compositions()
        .map(|x| clr_inverse(&helmert.apply_transpose(z_alpha(&x, alpha).values())))
        .collect::<Result<Vec<_>>>()?;
    DataMatrix::from_compositions(rows)?
        .with_row_labels(data.row_labels().to_vec())?
        .with_component_names(data.component_names().to_vec())
}

fn resample(data: &DataMatrix, seed: u64, replicate: usize, attempt: usize) -> DataMatrix {
    let mut rng = derived_rng(seed, &[replicate as u64, attempt as u64]);
    let n = data.n_rows();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    data.select_rows(&idx)
}

/// Runs `refit` on `B` row-resamples of `data`, redrawing failed replicates.
fn replicates<T, F>(data: &DataMatrix, b: usize, seed: u64, retries: usize, refit: F) -> Result<(Vec<T>, usize)>
where
    T: Send,
    F: Fn(&DataMatrix) -> Result<T> + Sync,
{
    let out: Vec<(T, usize)> = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut last = None;
            for attempt in 0..=retries {
                match refit(&resample(data, seed, r, attempt)) {
                    Ok(v) => return Ok((v, attempt)),
                    Err(e) => last = Some(e),
                }
            }
            Err(Error::BootstrapFailure {
                replicate: r,
                attempts: retries + 1,
                source: Box::new(last.expect("at least one attempt")),
            })
        })
        .collect::<Result<_>>()?;
    let redraws = out.iter().map(|(_, a)| a).sum();
    Ok((out.into_iter().map(|(v, _)| v).collect(), redraws))
}

/// Bootstrap test of α = 0 with default options.
pub fn bootstrap_test_alpha(data: &DataMatrix, b: usize, seed: u64) -> Result<BootstrapTestResult> {
    bootstrap_test_alpha_with(data, b, seed, &BootstrapOptions::default())
}

/// Estimates α̂, maps the data onto the logistic-normal null through
/// [`null_transform`], and re-estimates α on `b` row-resamples of the
/// transformed data.
pub fn bootstrap_test_alpha_with(
    data: &DataMatrix,
    b: usize,
    seed: u64,
    opts: &BootstrapOptions,
) -> Result<BootstrapTestResult> {
    if b < 19 {
        return Err(Error::InvalidParameter(format!(
            "at least 19 bootstrap replicates are required, got {b}"
        )));
    }
    let obs = fit_alpha_with(data, &opts.search)?;
    let alpha_obs = obs.best_alpha;
    let observed_statistic = match opts.statistic {
        BootstrapStatistic::Alpha => alpha_obs,
        BootstrapStatistic::LogLikelihoodRatio => lr_statistic(&obs.best_fit, data)?,
    };
    let null = null_transform(data, alpha_obs)?;
    let (pairs, redraws) = replicates(&null, b, derive_seed(seed, &[0x7e57]), opts.max_retries, |d| {
        let fit = fit_alpha_with(d, &opts.search)?;
        let stat = match opts.statistic {
            BootstrapStatistic::Alpha => fit.best_alpha,
            BootstrapStatistic::LogLikelihoodRatio => lr_statistic(&fit.best_fit, d)?,
        };
        Ok((fit.best_alpha, stat))
    })?;
    let (alpha_boot, boot_statistics): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(BootstrapTestResult {
        alpha_obs,
        p_value: bootstrap_p_value(observed_statistic, &boot_statistics),
        alpha_boot,
        statistic: opts.statistic,
        observed_statistic,
        boot_statistics,
        redraws,
    })
}

/// Percentile interval for α from `b` row-resamples of the data.
pub fn bootstrap_ci_alpha(data: &DataMatrix, b: usize, level: f64, seed: u64) -> Result<Interval> {
    Ok(bootstrap_ci_alpha_with(data, b, level, seed, &BootstrapOptions::default())?.interval)
}

pub fn bootstrap_ci_alpha_with(
    data: &DataMatrix,
    b: usize,
    level: f64,
    seed: u64,
    opts: &BootstrapOptions,
) -> Result<BootstrapInterval> {
    if b < 199 {
        return Err(Error::InvalidParameter(format!(
            "at least 199 bootstrap replicates are required, got {b}"
        )));
    }
    check_level(level)?;
    let estimate = fit_alpha_with(data, &opts.search)?.best_alpha;
    let search = match opts.replicate_window {
        Some(w) => AlphaSearch {
            grid: AlphaSearch::around(estimate, w)?.grid,
            expand_edges: true,
            ..opts.search.clone()
        },
        None => opts.search.clone(),
    };
    let (alpha_boot, redraws) =
        replicates(data, b, derive_seed(seed, &[0xc1]), opts.max_retries, |d| {
            Ok(fit_alpha_with(d, &search)?.best_alpha)
        })?;
    let mut sorted = alpha_boot.clone();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let interval = Interval {
        estimate,
        lower: quantile_type1(&sorted, tail),
        upper: quantile_type1(&sorted, 1.0 - tail),
        level,
        standard_error: None,
    };
    Ok(BootstrapInterval {
        interval,
        alpha_boot,
        redraws,
    })
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    Ok(())
}

/// Observed-information interval: `α̂ ± z·(−ℓ'')^{−1/2}` with ℓ'' the central
/// second difference of the profile log-likelihood at step `h`.
pub fn curvature_ci_alpha(data: &DataMatrix, level: f64, h: f64) -> Result<Interval> {
    let search = AlphaSearch {
        em_tol: 1e-10,
        em_max_iter: 5000,
        ..AlphaSearch::default()
    };
    let best = fit_alpha_with(data, &search)?;
    let profile = |a: f64| -> Result<f64> {
        let grid = [a];
        let s = AlphaSearch {
            grid: grid.to_vec(),
            refine: false,
            ..search.clone()
        };
        Ok(fit_alpha_with(data, &s)?.best_fit.log_likelihood)
    };
    curvature_ci_from_profile(profile, best.best_alpha, level, h)
}

/// Curvature interval for an arbitrary profile function maximized at `alpha_hat`.
pub fn curvature_ci_from_profile<F>(profile: F, alpha_hat: f64, level: f64, h: f64) -> Result<Interval>
where
    F: Fn(f64) -> Result<f64>,
{
    check_level(level)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if alpha_hat - h < -1.0 || alpha_hat + h > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha_hat = {alpha_hat} is not an interior maximum for step {h}"
        )));
    }
    let l0 = profile(alpha_hat)?;
    let lp = profile(alpha_hat + h)?;
    let lm = profile(alpha_hat - h)?;
    let second = (lp - 2.0 * l0 + lm) / (h * h);
    if !(second < 0.0) {
        return Err(Error::NonConcaveProfile {
            alpha: alpha_hat,
            second_difference: second,
        });
    }
    let se = 1.0 / (-second).sqrt();
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + level / 2.0);
    Ok(Interval {
        estimate: alpha_hat,
        lower: alpha_hat - z * se,
        upper: alpha_hat + z * se,
        level,
        standard_error: Some(se),
    })
}

/// Monte-Carlo mass of `N(μ, Σ)` outside `A_α`, split by the violated
/// constraint (argmin of `1 + α·(Hᵀy)_i`, lowest index on ties).
pub fn outside_probability(theta: &FoldedNormalParams, draws: u64, seed: u64) -> Result<OutsideProbability> {
    let alpha = theta.alpha();
    if alpha == 0.0 {
        return Err(Error::AlphaZero("outside_probability"));
    }
    if draws < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "at least 10000 draws are required, got {draws}"
        )));
    }
    let parts = theta.parts();
    let helmert = HelmertSubmatrix::new(parts)?;
    let g = theta.gaussian();
    let chunks = draws.div_ceil(CHUNK as u64);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let size = (draws - c * CHUNK as u64).min(CHUNK as u64);
            let mut rng = derived_rng(seed, &[c]);
            let mut counts = vec![0u64; parts];
            let mut normals = vec![0.0; g.dim()];
            let mut y = vec![0.0; g.dim()];
            let mut v = vec![0.0; parts];
            for _ in 0..size {
                g.sample_into(&mut rng, &mut normals, &mut y);
                helmert.apply_transpose_into(&y, &mut v);
                if min_margin(&v, alpha) <= 0.0 {
                    let mut k = 0;
                    for i in 1..parts {
                        if alpha * v[i] < alpha * v[k] {
                            k = i;
                        }
                    }
                    counts[k] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; parts],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let total_count: u64 = counts.iter().sum();
    Ok(OutsideProbability {
        total: total_count as f64 / draws as f64,
        per_component: counts.iter().map(|&c| c as f64 / draws as f64).collect(),
        counts,
        draws,
    })
}
