use rayon::prelude::*;
use serde::Serialize;

use super::brent_maximize;
use super::em::{em_fit, loglik_alpha0, FitResult, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// `−1, −0.95, …, 1`.
pub fn default_alpha_grid() -> Vec<f64> {
    grid_with_step(0.05)
}

fn grid_with_step(step: f64) -> Vec<f64> {
    let k = (2.0 / step).round() as i64;
    (0..=k).map(|i| -1.0 + 2.0 * i as f64 / k as f64).map(snap).collect()
}

/// Removes representation noise so that the grid contains an exact zero.
fn snap(a: f64) -> f64 {
    let r = (a * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Settings for the search over α.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaSearch {
    pub grid: Vec<f64>,
    /// Refine the grid argmax with Brent's method.
    pub refine: bool,
    /// Width of the final Brent bracket.
    pub xtol: f64,
    pub em_tol: f64,
    pub em_max_iter: usize,
    /// While the grid argmax sits on an edge of the grid (other than ±1),
    /// extend the grid outward by its end spacing.
    pub expand_edges: bool,
}

impl Default for AlphaSearch {
    fn default() -> Self {
        Self {
            grid: default_alpha_grid(),
            refine: true,
            xtol: 1e-4,
            em_tol: DEFAULT_TOL,
            em_max_iter: DEFAULT_MAX_ITER,
            expand_edges: false,
        }
    }
}

impl AlphaSearch {
    /// Evenly spaced grid over `[−1, 1]` with the given step, refined.
    pub fn with_step(step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grid step must lie in (0, 1], got {step}"
            )));
        }
        Ok(Self {
            grid: grid_with_step(step),
            ..Self::default()
        })
    }

    /// Five-point grid over `center ± half_width` (clipped to `[−1, 1]`)
    /// that expands while the maximum lies on its edge.
    pub fn around(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(-1.0..=1.0).contains(&center) {
            return Err(Error::InvalidParameter(format!(
                "invalid window {center} ± {half_width}"
            )));
        }
        let step = half_width / 2.0;
        let grid = (-2..=2)
            .map(|k| snap((center + k as f64 * step).clamp(-1.0, 1.0)))
            .collect();
        Ok(Self {
            grid,
            expand_edges: true,
            ..Self::default()
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaSearchResult {
    pub best_alpha: f64,
    pub best_fit: FitResult,
    /// Every evaluated `(α, ℓ_α)`, sorted by α.
    pub profile: Vec<(f64, f64)>,
}

fn fit_at(data: &DataMatrix, alpha: f64, search: &AlphaSearch) -> Result<FitResult> {
    if alpha == 0.0 {
        loglik_alpha0(data)
    } else {
        em_fit(data, alpha, search.em_tol, search.em_max_iter)
    }
}

/// Maximized log-likelihood at α: converged EM, or the closed form at α = 0.
pub fn profile_loglik(data: &DataMatrix, alpha: f64) -> Result<f64> {
    Ok(fit_at(data, alpha, &AlphaSearch::default())?.log_likelihood)
}

/// Profile search over `grid`, optionally refined by Brent's method.
pub fn fit_alpha(data: &DataMatrix, grid: &[f64], refine: bool) -> Result<AlphaSearchResult> {
    fit_alpha_with(
        data,
        &AlphaSearch {
            grid: grid.to_vec(),
            refine,
            ..AlphaSearch::default()
        },
    )
}

pub fn fit_alpha_with(data: &DataMatrix, search: &AlphaSearch) -> Result<AlphaSearchResult> {
    if search.grid.is_empty() {
        return Err(Error::InvalidParameter("alpha grid is empty".into()));
    }
    if let Some(a) = search
        .grid
        .iter()
        .find(|a| !a.is_finite() || !(-1.0..=1.0).contains(*a))
    {
        return Err(Error::InvalidParameter(format!(
            "alpha grid value {a} outside [-1, 1]"
        )));
    }
    let mut grid = search.grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut fits: Vec<FitResult> = grid
        .par_iter()
        .map(|&a| fit_at(data, a, search))
        .collect::<Result<_>>()?;
    let mut k = argmax_fits(&fits);
    while search.expand_edges && grid.len() > 1 {
        let last = grid.len() - 1;
        let next = if k == 0 && grid[0] > -1.0 {
            snap((2.0 * grid[0] - grid[1]).max(-1.0))
        } else if k == last && grid[last] < 1.0 {
            snap((2.0 * grid[last] - grid[last - 1]).min(1.0))
        } else {
            break;
        };
        let fit = fit_at(data, next, search)?;
        if k == 0 {
            grid.insert(0, next);
            fits.insert(0, fit);
        } else {
            grid.push(next);
            fits.push(fit);
        }
        k = argmax_fits(&fits);
    }
    let mut profile: Vec<(f64, f64)> = grid
        .iter()
        .zip(&fits)
        .map(|(&a, f)| (a, f.log_likelihood))
        .collect();
    let mut best_alpha = grid[k];
    let mut best_fit = fits.swap_remove(k);

    if search.refine && grid.len() > 1 {
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(grid.len() - 1)];
        let mut evaluated: Vec<FitResult> = Vec::new();
        brent_maximize(
            |a| {
                let fit = fit_at(data, a, search)?;
                let ll = fit.log_likelihood;
                profile.push((a, ll));
                evaluated.push(fit);
                Ok(ll)
            },
            lo,
            hi,
            search.xtol,
            100,
        )?;
        for fit in evaluated {
            if fit.log_likelihood > best_fit.log_likelihood {
                best_alpha = fit.params.alpha();
                best_fit = fit;
            }
        }
        profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(AlphaSearchResult {
        best_alpha,
        best_fit,
        profile,
    })
}

/// Index of the largest log-likelihood; the first one on ties.
fn argmax_fits(fits: &[FitResult]) -> usize {
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if f.log_likelihood > fits[best].log_likelihood {
            best = i;
        }
    }
    best
}
