use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::cholesky_lower;

/// Förstner distance `√(Σ_i log² λ_i(A·B⁻¹))` between SPD matrices.
///
/// The eigenvalues of `AB⁻¹` are those of the symmetric `L⁻¹AL⁻ᵀ` with
/// `B = LLᵀ`.
pub fn covariance_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::InvalidDimension(format!(
            "cannot compare {}x{} with {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let l = cholesky_lower(b)
        .map_err(|_| Error::NotPositiveDefinite("second matrix is not positive definite".into()))?;
    let la = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::NumericFailure("triangular solve failed".into()))?;
    let m = l
        .solve_lower_triangular(&la.transpose())
        .ok_or_else(|| Error::NumericFailure("triangular solve failed".into()))?;
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    if eig.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite(
            "first matrix is not positive definite".into(),
        ));
    }
    Ok(eig.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt())
}

/// Euclidean distance between two vectors.
pub fn mean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidDimension(format!(
            "vectors have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
}
