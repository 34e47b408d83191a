use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::geometry::{clr_inverse, fold, Composition, EuclideanPoint, HelmertSubmatrix};

/// Points per principal-component curve.
pub const PC_CURVE_POINTS: usize = 61;

/// Maps a point of ℝ^{D−1} to the simplex: folding for α ≠ 0, the inverse
/// ilr for α = 0.
fn to_simplex(y: &[f64], alpha: f64, helmert: &HelmertSubmatrix) -> Result<Composition> {
    if alpha == 0.0 {
        clr_inverse(&helmert.apply_transpose(y))
    } else {
        Ok(fold(&EuclideanPoint::new(y.to_vec())?, alpha)?.0)
    }
}

/// The α-mean: the fitted Euclidean mean carried back to the simplex.
pub fn frechet_mean(fit: &FitResult) -> Result<Composition> {
    let params = &fit.params;
    let helmert = HelmertSubmatrix::new(params.parts())?;
    to_simplex(params.mu(), params.alpha(), &helmert)
}

#[derive(Debug, Clone, Serialize)]
pub struct PcCurve {
    pub index: usize,
    pub eigenvalue: f64,
    /// Offsets along the component, from `−3√λ` to `3√λ`.
    pub t: Vec<f64>,
    pub points: Vec<Composition>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplexPca {
    /// Eigenvalues of `HᵀΣ̂H` in decreasing order; the last one is zero.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors in the zero-sum space, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    pub curves: Vec<PcCurve>,
}

/// Eigen-analysis of `HᵀΣ̂H` and the first `n_components` component curves
/// `μ̂ + t·H·v_k` mapped onto the simplex.
pub fn simplex_pca(fit: &FitResult, n_components: usize) -> Result<SimplexPca> {
    if !fit.converged {
        return Err(Error::NotConverged(
            "principal components need a converged fit".into(),
        ));
    }
    let params = &fit.params;
    let parts = params.parts();
    if n_components > parts - 1 {
        return Err(Error::InvalidParameter(format!(
            "at most {} components exist, {n_components} requested",
            parts - 1
        )));
    }
    let helmert = HelmertSubmatrix::new(parts)?;
    let h = helmert.matrix();
    let star: DMatrix<f64> = h.transpose() * params.sigma() * &h;
    let star = (&star + star.transpose()) * 0.5;
    let eig = SymmetricEigen::new(star);
    let mut order: Vec<usize> = (0..parts).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();

    let mut curves = Vec::with_capacity(n_components);
    for (k, (lambda, v)) in eigenvalues.iter().zip(&eigenvectors).take(n_components).enumerate() {
        let dir = helmert.apply(v);
        let half = 3.0 * lambda.max(0.0).sqrt();
        let mut t = Vec::with_capacity(PC_CURVE_POINTS);
        let mut points = Vec::with_capacity(PC_CURVE_POINTS);
        for j in 0..PC_CURVE_POINTS {
            let s = -half + 2.0 * half * j as f64 / (PC_CURVE_POINTS - 1) as f64;
            let y: Vec<f64> = params.mu().iter().zip(&dir).map(|(m, d)| m + s * d).collect();
            t.push(s);
            points.push(to_simplex(&y, params.alpha(), &helmert)?);
        }
        curves.push(PcCurve {
            index: k + 1,
            eigenvalue: *lambda,
            t,
            points,
        });
    }
    Ok(SimplexPca {
        eigenvalues,
        eigenvectors,
        curves,
    })
}
