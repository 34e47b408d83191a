use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Relative pivot size below which a covariance is reported as singular.
const PIVOT_FLOOR: f64 = 1e-14;

/// Multivariate normal backed by a lower Cholesky factor stored row-major.
#[derive(Debug, Clone)]
pub(crate) struct Gaussian {
    mean: Vec<f64>,
    lower: Vec<f64>,
    dim: usize,
    log_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CholeskyFailure {
    NotPositiveDefinite,
    Singular,
}

pub(crate) fn cholesky_lower(cov: &DMatrix<f64>) -> std::result::Result<DMatrix<f64>, CholeskyFailure> {
    let scale = cov.diagonal().iter().copied().fold(0.0, f64::max);
    if !(scale > 0.0) || cov.iter().any(|v| !v.is_finite()) {
        return Err(CholeskyFailure::Singular);
    }
    let chol = nalgebra::Cholesky::new(cov.clone()).ok_or(CholeskyFailure::NotPositiveDefinite)?;
    let l = chol.unpack();
    if l.diagonal().iter().any(|v| v * v <= PIVOT_FLOOR * scale) {
        return Err(CholeskyFailure::Singular);
    }
    Ok(l)
}

impl Gaussian {
    pub(crate) fn new(mean: &[f64], cov: &DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::InvalidDimension(format!(
                "mean has length {dim} but covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let l = cholesky_lower(cov).map_err(|e| match e {
            CholeskyFailure::NotPositiveDefinite => {
                Error::NotPositiveDefinite("Cholesky factorization failed".into())
            }
            CholeskyFailure::Singular => {
                Error::SingularCovariance("covariance is numerically singular".into())
            }
        })?;
        let log_det_half: f64 = l.diagonal().iter().map(|v| v.ln()).sum();
        let mut lower = vec![0.0; dim * dim];
        for r in 0..dim {
            for c in 0..=r {
                lower[r * dim + c] = l[(r, c)];
            }
        }
        Ok(Self {
            mean: mean.to_vec(),
            lower,
            dim,
            log_norm: -0.5 * dim as f64 * LN_2PI - log_det_half,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// `(y − μ)ᵀ Σ⁻¹ (y − μ)` by forward substitution; `scratch` has length `dim`.
    #[inline]
    pub(crate) fn mahalanobis_sq(&self, y: &[f64], scratch: &mut [f64]) -> f64 {
        let d = self.dim;
        let mut total = 0.0;
        for r in 0..d {
            let row = &self.lower[r * d..r * d + r + 1];
            let mut acc = y[r] - self.mean[r];
            for c in 0..r {
                acc -= row[c] * scratch[c];
            }
            let z = acc / row[r];
            scratch[r] = z;
            total += z * z;
        }
        total
    }

    #[inline]
    pub(crate) fn log_pdf_with(&self, y: &[f64], scratch: &mut [f64]) -> f64 {
        self.log_norm - 0.5 * self.mahalanobis_sq(y, scratch)
    }

    pub(crate) fn log_pdf(&self, y: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.dim];
        self.log_pdf_with(y, &mut scratch)
    }

    /// Writes `μ + L·z` with `z` standard normal into `out`.
    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, normals: &mut [f64], out: &mut [f64]) {
        let d = self.dim;
        for z in normals.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        for r in 0..d {
            let row = &self.lower[r * d..r * d + r + 1];
            let mut acc = self.mean[r];
            for c in 0..=r {
                acc += row[c] * normals[c];
            }
            out[r] = acc;
        }
    }
}

/// Largest absolute asymmetry `|A_ij − A_ji|`.
pub(crate) fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}
