use super::{Composition, EuclideanPoint, HelmertSubmatrix, ZeroSumVector};
use crate::error::{Error, Result};

/// Below this |α| the `w_α` map is evaluated in the cancellation-free form.
const SMALL_ALPHA: f64 = 1e-2;

/// Centered log-ratio: `log(x_i / g(x))` with `g` the geometric mean.
pub fn clr(x: &Composition) -> ZeroSumVector {
    let logs: Vec<f64> = x.parts().iter().map(|v| v.ln()).collect();
    ZeroSumVector::project(logs)
}

/// Inverse clr (softmax). Accepts any finite vector; adding a constant to
/// every component does not change the result.
pub fn clr_inverse(w: &[f64]) -> Result<Composition> {
    if w.len() < 2 {
        return Err(Error::InvalidDimension(format!(
            "clr inverse needs at least 2 components, got {}",
            w.len()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("non-finite clr coordinates".into()));
    }
    softmax(w)
}

/// Normalized `exp(w_i − max w)`; fails if a part underflows to zero.
pub(crate) fn softmax(w: &[f64]) -> Result<Composition> {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let parts: Vec<f64> = w.iter().map(|v| (v - max).exp()).collect();
    if parts.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::NumericFailure(
            "a part underflows to zero; the point is too far from the barycenter".into(),
        ));
    }
    Ok(Composition::from_positive_unchecked(parts))
}

/// Power transformation `u_i = x_i^α / Σ_j x_j^α`.
///
/// Cannot fail for |α| ≤ 1; larger powers of extreme compositions may
/// underflow.
pub fn alpha_power(x: &Composition, alpha: f64) -> Result<Composition> {
    let scaled: Vec<f64> = x.parts().iter().map(|v| alpha * v.ln()).collect();
    softmax(&scaled)
}

/// `w_α(x) = (D·u_α(x) − 1)/α`, a zero-sum vector in `Q_α`.
///
/// For small |α| the components are computed as
/// `w_i = Σ_j u_j · expm1(α(log x_i − log x_j))/α`, which tends to clr(x)
/// without cancellation.
pub fn w_alpha(x: &Composition, alpha: f64) -> Result<ZeroSumVector> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero("w_alpha"));
    }
    let mut out = vec![0.0; x.dim()];
    w_alpha_into(x.parts(), alpha, &mut out);
    Ok(ZeroSumVector::from_unchecked(out))
}

pub(crate) fn w_alpha_into(x: &[f64], alpha: f64, out: &mut [f64]) {
    let d = x.len();
    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let max = logs
        .iter()
        .map(|l| alpha * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let powers: Vec<f64> = logs.iter().map(|l| (alpha * l - max).exp()).collect();
    let total: f64 = powers.iter().sum();
    if alpha.abs() >= SMALL_ALPHA {
        for (o, p) in out.iter_mut().zip(&powers) {
            *o = (d as f64 * p / total - 1.0) / alpha;
        }
    } else {
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                if i != j {
                    acc += powers[j] * (alpha * (logs[i] - logs[j])).exp_m1() / alpha;
                }
            }
            out[i] = acc / total;
        }
    }
}

/// Inverse of [`w_alpha`]: `x_i ∝ (1 + α m_i)^{1/α}`.
///
/// Fails with [`Error::OutOfRegion`] when some `1 + α m_i ≤ 0`.
pub fn w_alpha_inverse(m: &[f64], alpha: f64) -> Result<Composition> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero("w_alpha_inverse"));
    }
    if m.len() < 2 {
        return Err(Error::InvalidDimension(format!(
            "w_alpha inverse needs at least 2 components, got {}",
            m.len()
        )));
    }
    let mut logs = Vec::with_capacity(m.len());
    let mut min_margin = f64::INFINITY;
    for v in m {
        let margin = 1.0 + alpha * v;
        min_margin = min_margin.min(margin);
        logs.push((alpha * v).ln_1p() / alpha);
    }
    if !(min_margin > 0.0) {
        return Err(Error::OutOfRegion { min_margin });
    }
    softmax(&logs)
}

/// The α-transformation `z_α(x) = H w_α(x)`, or `H clr(x)` at α = 0.
pub fn z_alpha(x: &Composition, alpha: f64) -> EuclideanPoint {
    let helmert = HelmertSubmatrix::new(x.dim()).expect("composition has D >= 2");
    let w = if alpha == 0.0 {
        clr(x).into_inner()
    } else {
        let mut w = vec![0.0; x.dim()];
        w_alpha_into(x.parts(), alpha, &mut w);
        w
    };
    EuclideanPoint::from_unchecked(helmert.apply(&w))
}

/// Inverse α-transformation on `A_α`: `w_α⁻¹(Hᵀ y)`, or `clr⁻¹(Hᵀ y)` at α = 0.
pub fn z_alpha_inverse(y: &EuclideanPoint, alpha: f64) -> Result<Composition> {
    let helmert = HelmertSubmatrix::new(y.dim() + 1)?;
    let v = helmert.apply_transpose(y.values());
    if alpha == 0.0 {
        clr_inverse(&v)
    } else {
        w_alpha_inverse(&v, alpha)
    }
}
