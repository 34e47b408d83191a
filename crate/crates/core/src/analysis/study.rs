use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{covariance_distance, mean_distance};
use crate::error::{Error, Result};
use crate::estimation::{em_fit, fit_alpha_with, loglik_alpha0, AlphaSearch, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::inference::outside_probability;
use crate::model::{sample, FoldedNormalParams};
use crate::seed::derive_seed;

/// Mean of the α = 0.5 recovery design.
pub const MU_POSITIVE: [f64; 4] = [-0.566, -0.979, -0.648, -0.651];
/// Mean of the α = −0.5 recovery design, also used for α recovery.
pub const MU_NEGATIVE: [f64; 4] = [1.715, 0.914, 0.115, 0.167];
/// Base covariance, scaled by κ.
pub const BASE_SIGMA: [[f64; 4]; 4] = [
    [0.149, -0.458, 0.002, -0.005],
    [-0.458, 1.523, 0.000, 0.007],
    [0.002, 0.000, 0.037, -0.047],
    [-0.005, 0.007, -0.047, 0.061],
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MuOverride {
    pub alpha: f64,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub alphas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub ns: Vec<usize>,
    pub replications: usize,
    pub base_mu: Vec<f64>,
    pub base_sigma: Vec<Vec<f64>>,
    /// Means used instead of `base_mu` for particular α values.
    #[serde(default)]
    pub mu_overrides: Vec<MuOverride>,
    pub seed: u64,
    /// Also re-estimate α on every data set.
    #[serde(default)]
    pub estimate_alpha: bool,
    /// Grid step of the α search when `estimate_alpha` is set.
    #[serde(default = "default_step")]
    pub alpha_grid_step: f64,
    /// Monte-Carlo draws for the true inside probability of each (α, κ).
    #[serde(default = "default_true_p_draws")]
    pub true_p_draws: u64,
    #[serde(default = "default_tol")]
    pub em_tol: f64,
    #[serde(default = "default_max_iter")]
    pub em_max_iter: usize,
}

fn default_step() -> f64 {
    0.05
}

fn default_true_p_draws() -> u64 {
    1_000_000
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn base_sigma_rows() -> Vec<Vec<f64>> {
    BASE_SIGMA.iter().map(|r| r.to_vec()).collect()
}

impl StudyConfig {
    /// Desk-scale mean/covariance/p recovery at α = ±0.5.
    pub fn paper_desk() -> Self {
        Self {
            alphas: vec![-0.5, 0.5],
            kappas: vec![0.5, 1.0, 5.0],
            ns: vec![100, 500, 2000],
            replications: 50,
            base_mu: MU_NEGATIVE.to_vec(),
            base_sigma: base_sigma_rows(),
            mu_overrides: vec![MuOverride {
                alpha: 0.5,
                mu: MU_POSITIVE.to_vec(),
            }],
            seed: 2024,
            estimate_alpha: false,
            alpha_grid_step: default_step(),
            true_p_draws: default_true_p_draws(),
            em_tol: DEFAULT_TOL,
            em_max_iter: DEFAULT_MAX_ITER,
        }
    }

    /// Desk-scale α recovery: α ∈ {0.1, 0.5, 0.9}, κ = 1, n = 5000.
    pub fn alpha_desk() -> Self {
        Self {
            alphas: vec![0.1, 0.5, 0.9],
            kappas: vec![1.0],
            ns: vec![5000],
            replications: 30,
            base_mu: MU_NEGATIVE.to_vec(),
            base_sigma: base_sigma_rows(),
            mu_overrides: Vec::new(),
            seed: 2025,
            estimate_alpha: true,
            alpha_grid_step: default_step(),
            true_p_draws: default_true_p_draws(),
            em_tol: DEFAULT_TOL,
            em_max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn mu_for(&self, alpha: f64) -> &[f64] {
        self.mu_overrides
            .iter()
            .find(|o| o.alpha == alpha)
            .map_or(&self.base_mu, |o| &o.mu)
    }

    fn sigma(&self, kappa: f64) -> Result<DMatrix<f64>> {
        let d = self.base_mu.len();
        if self.base_sigma.len() != d || self.base_sigma.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidDimension(format!(
                "base_sigma must be {d}x{d} to match base_mu"
            )));
        }
        let flat: Vec<f64> = self.base_sigma.iter().flatten().map(|v| v * kappa).collect();
        Ok(DMatrix::from_row_slice(d, d, &flat))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.alphas.is_empty() || self.kappas.is_empty() || self.ns.is_empty() {
            return Err(Error::InvalidParameter("alphas, kappas and ns must be non-empty".into()));
        }
        if let Some(k) = self.kappas.iter().find(|k| !(**k > 0.0)) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {k}")));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(-1.0..=1.0).contains(*a)) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [-1, 1], got {a}")));
        }
        if self.mu_overrides.iter().any(|o| o.mu.len() != self.base_mu.len()) {
            return Err(Error::InvalidDimension("mu override length differs from base_mu".into()));
        }
        self.sigma(1.0).map(|_| ())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub alpha: f64,
    pub kappa: f64,
    pub n: usize,
    /// Replications that produced a fit.
    pub completed: usize,
    pub failures: usize,
    /// Monte-Carlo inside probability of the true parameters.
    pub true_p: f64,
    pub mean_error: f64,
    pub covariance_error: f64,
    pub p_error: f64,
    /// Mean of `α̂ − α`; only with `estimate_alpha`.
    pub alpha_bias: Option<f64>,
    /// Mean of `|α̂ − α|`; only with `estimate_alpha`.
    pub alpha_abs_error: Option<f64>,
    /// Whether every EM trace was non-decreasing.
    pub traces_monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn row(&self, alpha: f64, kappa: f64, n: usize) -> Option<&StudyRow> {
        self.rows
            .iter()
            .find(|r| r.alpha == alpha && r.kappa == kappa && r.n == n)
    }
}

struct Replicate {
    mean_error: f64,
    covariance_error: f64,
    p_error: f64,
    alpha_error: Option<f64>,
    monotone: bool,
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-9)
}

/// Simulates, refits and scores every (α, κ, n, replication); failed
/// replications are counted and skipped.
pub fn recovery_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let search = AlphaSearch {
        em_tol: cfg.em_tol,
        em_max_iter: cfg.em_max_iter,
        ..AlphaSearch::with_step(cfg.alpha_grid_step)?
    };

    let mut cells = Vec::new();
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        for (ki, &kappa) in cfg.kappas.iter().enumerate() {
            let theta = FoldedNormalParams::new(alpha, 1.0, cfg.mu_for(alpha).to_vec(), cfg.sigma(kappa)?)?;
            let true_p = if alpha == 0.0 {
                1.0
            } else {
                let seed = derive_seed(cfg.seed, &[ai as u64, ki as u64, u64::MAX]);
                1.0 - outside_probability(&theta, cfg.true_p_draws.max(10_000), seed)?.total
            };
            for (ni, &n) in cfg.ns.iter().enumerate() {
                cells.push(((ai, ki, ni), alpha, kappa, n, theta.clone(), true_p));
            }
        }
    }

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replications).map(move |r| (c, r)))
        .collect();
    let results: Vec<Option<Replicate>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let ((ai, ki, ni), alpha, _, n, ref theta, true_p) = cells[c];
            let seed = derive_seed(cfg.seed, &[ai as u64, ki as u64, ni as u64, r as u64]);
            run_one(theta, alpha, n, seed, true_p, cfg, &search).ok()
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    for (c, (_, alpha, kappa, n, _, true_p)) in cells.iter().enumerate() {
        let reps: Vec<&Replicate> = results[c * cfg.replications..(c + 1) * cfg.replications]
            .iter()
            .flatten()
            .collect();
        let completed = reps.len();
        let avg = |f: &dyn Fn(&Replicate) -> f64| {
            if completed == 0 {
                f64::NAN
            } else {
                reps.iter().map(|r| f(r)).sum::<f64>() / completed as f64
            }
        };
        let (alpha_bias, alpha_abs_error) = if cfg.estimate_alpha {
            (
                Some(avg(&|r| r.alpha_error.unwrap_or(f64::NAN))),
                Some(avg(&|r| r.alpha_error.unwrap_or(f64::NAN).abs())),
            )
        } else {
            (None, None)
        };
        rows.push(StudyRow {
            alpha: *alpha,
            kappa: *kappa,
            n: *n,
            completed,
            failures: cfg.replications - completed,
            true_p: *true_p,
            mean_error: avg(&|r| r.mean_error),
            covariance_error: avg(&|r| r.covariance_error),
            p_error: avg(&|r| r.p_error),
            alpha_bias,
            alpha_abs_error,
            traces_monotone: reps.iter().all(|r| r.monotone),
        });
    }
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
    })
}

fn run_one(
    theta: &FoldedNormalParams,
    alpha: f64,
    n: usize,
    seed: u64,
    true_p: f64,
    cfg: &StudyConfig,
    search: &AlphaSearch,
) -> Result<Replicate> {
    let data = sample(theta, n, seed)?;
    let fit = if alpha == 0.0 {
        loglik_alpha0(&data)?
    } else {
        em_fit(&data, alpha, cfg.em_tol, cfg.em_max_iter)?
    };
    let alpha_error = if cfg.estimate_alpha {
        Some(fit_alpha_with(&data, search)?.best_alpha - alpha)
    } else {
        None
    };
    Ok(Replicate {
        mean_error: mean_distance(fit.params.mu(), theta.mu())?,
        covariance_error: covariance_distance(fit.params.sigma(), theta.sigma())?,
        p_error: (fit.params.p() - true_p).abs(),
        alpha_error,
        monotone: monotone(&fit.trace),
    })
}
