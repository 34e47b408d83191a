//! Log-Jacobians of the two branches of the folding map, measured against
//! Lebesgue measure on the first `D − 1` parts of the composition.

use super::fold::fold_scale;
use super::{Composition, FOLD_SCALE_FLOOR};
use crate::error::{Error, Result};

/// `log|J⁰_α| = (D − ½)·log D + Σ_i [(α − 1)·log x_i − log Σ_j x_j^α]`.
///
/// At α = 0 this is the ilr Jacobian `−½·log D − Σ log x_i`; at α = 1 it is
/// the constant `(D − ½)·log D`.
pub fn log_jacobian_g0(x: &Composition, alpha: f64) -> f64 {
    let d = x.dim() as f64;
    let logs: Vec<f64> = x.parts().iter().map(|v| v.ln()).collect();
    let sum_logs: f64 = logs.iter().sum();
    (d - 0.5) * d.ln() + (alpha - 1.0) * sum_logs - d * log_power_sum(&logs, alpha)
}

/// `log Σ_j exp(α·l_j)` without overflow.
pub(crate) fn log_power_sum(logs: &[f64], alpha: f64) -> f64 {
    let max = logs
        .iter()
        .map(|l| alpha * l)
        .fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (alpha * l - max).exp()).sum::<f64>().ln()
}

/// Log-determinant of the fold `v ↦ v / s²` on the zero-sum plane of
/// dimension `dim`: `−2·dim·log|s|`.
pub fn fold_log_jacobian_factor(fold_scale: f64, dim: usize) -> Result<f64> {
    if !(fold_scale.abs() >= FOLD_SCALE_FLOOR) {
        return Err(Error::SingularFold(fold_scale));
    }
    Ok(-2.0 * dim as f64 * fold_scale.abs().ln())
}

/// The fold factor `−2(D − 1)·log|w*_α(x)|` of a composition.
pub fn fold_log_jacobian(x: &Composition, alpha: f64) -> Result<f64> {
    fold_log_jacobian_factor(fold_scale(x, alpha)?, x.dim() - 1)
}

/// Total log-Jacobian of the folded branch, `x ↦ z_α(x)/w*²`.
///
/// The map is the fold `z ↦ z/w*²` composed with `z_α`, so its determinant
/// is `|J⁰_α|·|w*|^{−2(D−1)}`.
pub fn log_jacobian_g1(x: &Composition, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero("log_jacobian_g1"));
    }
    Ok(log_jacobian_g0(x, alpha) + fold_log_jacobian(x, alpha)?)
}
