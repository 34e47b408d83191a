use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// The Helmert matrix with its first row deleted: `(D−1) × D`, orthonormal
/// rows, every row orthogonal to the ones vector.
///
/// Row `i` (1-based) holds `1/√(i(i+1))` in positions `1..=i`,
/// `−i/√(i(i+1))` in position `i+1` and zeros after. Products are evaluated
/// from that structure in `O(D)`; [`HelmertSubmatrix::matrix`] materializes
/// the dense entries when needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HelmertSubmatrix {
    parts: usize,
}

pub fn helmert_submatrix(parts: usize) -> Result<HelmertSubmatrix> {
    HelmertSubmatrix::new(parts)
}

impl HelmertSubmatrix {
    pub fn new(parts: usize) -> Result<Self> {
        if parts < 2 {
            return Err(Error::InvalidDimension(format!(
                "Helmert sub-matrix needs D >= 2, got {parts}"
            )));
        }
        Ok(Self { parts })
    }

    /// Number of columns `D`.
    pub fn parts(&self) -> usize {
        self.parts
    }

    /// Number of rows `D − 1`.
    pub fn rows(&self) -> usize {
        self.parts - 1
    }

    #[inline]
    fn row_scale(i: usize) -> f64 {
        let i = i as f64;
        1.0 / (i * (i + 1.0)).sqrt()
    }

    /// Dense `(D−1) × D` entries.
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.parts;
        DMatrix::from_fn(d - 1, d, |r, c| {
            let i = r + 1;
            let s = Self::row_scale(i);
            if c < i {
                s
            } else if c == i {
                -(i as f64) * s
            } else {
                0.0
            }
        })
    }

    /// `H w` for a `D`-vector `w`, written into `out` (length `D − 1`).
    pub fn apply_into(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.parts);
        debug_assert_eq!(out.len(), self.parts - 1);
        let mut prefix = 0.0;
        for i in 1..self.parts {
            prefix += w[i - 1];
            out[i - 1] = (prefix - i as f64 * w[i]) * Self::row_scale(i);
        }
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.parts - 1];
        self.apply_into(w, &mut out);
        out
    }

    /// `Hᵀ y` for a `(D−1)`-vector `y`, written into `out` (length `D`).
    pub fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.parts - 1);
        debug_assert_eq!(out.len(), self.parts);
        let d = self.parts;
        // out[j] = Σ_{i ≥ max(j,1)} s_i y_i − j·s_j·y_j (0-based j, rows 1-based)
        let mut suffix = 0.0;
        for j in (0..d).rev() {
            let own = if j >= 1 {
                -(j as f64) * Self::row_scale(j) * y[j - 1]
            } else {
                0.0
            };
            if j < d - 1 {
                suffix += Self::row_scale(j + 1) * y[j];
            }
            out[j] = suffix + own;
        }
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.parts];
        self.apply_transpose_into(y, &mut out);
        out
    }
}
