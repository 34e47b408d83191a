//! Maps between the simplex, the zero-sum hyperplane and ℝ^{D−1}.
//!
//! Three vector spaces appear throughout the crate:
//!
//! * [`Composition`]: a point on the open simplex `S^{D−1}`.
//! * [`ZeroSumVector`]: a `D`-vector on the hyperplane `Σ w_i = 0` (clr and
//!   `w_α` images live here).
//! * [`EuclideanPoint`]: a `(D−1)`-vector, the Helmert coordinates of a
//!   zero-sum vector.
//!
//! For α ≠ 0 the image of the simplex is the region where `1 + α·w_i > 0` for
//! every part. Points outside it are folded back with [`fold`].

pub(crate) mod fold;
mod helmert;
pub(crate) mod jacobian;
pub(crate) mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fold::{fold, fold_scale, in_alpha_region, region_margin, unfold};
pub use helmert::{helmert_submatrix, HelmertSubmatrix};
pub use jacobian::{fold_log_jacobian, fold_log_jacobian_factor, log_jacobian_g0, log_jacobian_g1};
pub use transform::{
    alpha_power, clr, clr_inverse, w_alpha, w_alpha_inverse, z_alpha, z_alpha_inverse,
};

/// Absolute tolerance on the unit sum accepted by [`Composition::new`].
pub const UNIT_SUM_TOLERANCE: f64 = 1e-6;

/// Fold scales below this magnitude are treated as singular.
pub const FOLD_SCALE_FLOOR: f64 = 1e-12;

/// A point on the open simplex: strictly positive parts summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Composition(Vec<f64>);

impl Composition {
    /// Validates `parts` and renormalizes them to an exact unit sum.
    ///
    /// The parts must already sum to one within [`UNIT_SUM_TOLERANCE`]; use
    /// [`Composition::closure`] to rescale arbitrary positive vectors.
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        check_positive(&parts)?;
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > UNIT_SUM_TOLERANCE {
            return Err(Error::InvalidComposition(format!(
                "parts sum to {total}, expected 1"
            )));
        }
        Ok(Self::normalized(parts))
    }

    /// Rescales a strictly positive vector onto the simplex.
    pub fn closure(parts: Vec<f64>) -> Result<Self> {
        check_positive(&parts)?;
        Ok(Self::normalized(parts))
    }

    pub fn barycenter(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(format!(
                "a composition needs at least 2 parts, got {dim}"
            )));
        }
        Ok(Self(vec![1.0 / dim as f64; dim]))
    }

    fn normalized(mut parts: Vec<f64>) -> Self {
        let total: f64 = parts.iter().sum();
        // already closed up to rounding: keep the input bits
        if (total - 1.0).abs() > 4.0 * f64::EPSILON {
            parts.iter_mut().for_each(|p| *p /= total);
        }
        Self(parts)
    }

    /// Builds a composition from positive weights known to be valid.
    pub(crate) fn from_positive_unchecked(parts: Vec<f64>) -> Self {
        debug_assert!(parts.iter().all(|p| *p > 0.0 && p.is_finite()));
        Self::normalized(parts)
    }

    pub fn parts(&self) -> &[f64] {
        &self.0
    }

    /// Number of parts `D`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn check_positive(parts: &[f64]) -> Result<()> {
    if parts.len() < 2 {
        return Err(Error::InvalidDimension(format!(
            "a composition needs at least 2 parts, got {}",
            parts.len()
        )));
    }
    if let Some((i, v)) = parts
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v <= 0.0)
    {
        return Err(Error::InvalidComposition(format!(
            "part {} is {v}; every part must be finite and strictly positive",
            i + 1
        )));
    }
    Ok(())
}

impl TryFrom<Vec<f64>> for Composition {
    type Error = Error;

    fn try_from(parts: Vec<f64>) -> Result<Self> {
        Composition::new(parts)
    }
}

impl From<Composition> for Vec<f64> {
    fn from(x: Composition) -> Self {
        x.0
    }
}

impl AsRef<[f64]> for Composition {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A `D`-vector whose components sum to zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSumVector(Vec<f64>);

impl ZeroSumVector {
    /// Checks the zero-sum invariant (tolerance `1e-10`, relative to the
    /// vector's magnitude when that exceeds one).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidDimension(format!(
                "zero-sum vectors need at least 2 components, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite zero-sum vector".into()));
        }
        let total: f64 = values.iter().sum();
        let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if total.abs() > 1e-10 * scale {
            return Err(Error::InvalidParameter(format!(
                "components sum to {total:e}, expected 0"
            )));
        }
        Ok(Self(values))
    }

    /// Removes the mean so the result sums to zero to rounding.
    pub fn project(mut values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter_mut().for_each(|v| *v -= mean);
        Self(values)
    }

    pub(crate) fn from_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl AsRef<[f64]> for ZeroSumVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A point of ℝ^{D−1} (Helmert coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanPoint(Vec<f64>);

impl EuclideanPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDimension("empty Euclidean point".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite Euclidean point".into()));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Number of coordinates, `D − 1`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl AsRef<[f64]> for EuclideanPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Which branch of the folding map produced (or should invert) a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldBranch {
    /// The Euclidean pre-image lay inside `A_α`.
    Inside,
    /// The pre-image lay outside `A_α` and was folded back.
    Folded,
}
