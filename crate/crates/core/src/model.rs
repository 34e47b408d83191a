//! The α-folded multivariate normal distribution on the simplex.
//!
//! For `Y ~ N(μ, Σ)` on ℝ^{D−1}, `X = fold(Y)` has density
//! `K₀(x) + K₁(x)`, where
//!
//! * `K₀(x) = |J⁰_α(x)|·φ(z_α(x); μ, Σ)` integrates to `P(Y ∈ A_α)`, and
//! * `K₁(x) = |J⁰_α(x)|·|w*|^{−2(D−1)}·φ(z_α(x)/w*²; μ, Σ)` integrates to
//!   `P(Y ∉ A_α)`.
//!
//! The estimation model mixes the two kernels with a free weight,
//! `p·K₀ + (1 − p)·K₁`; see [`log_density`]. The law of `fold(Y)` itself is
//! [`fold_log_density`]. Both reduce to the logistic normal at α = 0.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::geometry::fold::{fold_preimage, scaled_min};
use crate::geometry::jacobian::log_power_sum;
use crate::geometry::transform::{softmax, w_alpha_into};
use crate::geometry::{Composition, FoldBranch, HelmertSubmatrix, FOLD_SCALE_FLOOR};
use crate::linalg::{asymmetry, Gaussian};
use crate::seed::{rng_from_seed, SimRng};

/// Symmetry tolerance for covariance matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Parameters `(α, p, μ, Σ)` of the α-folded normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct FoldedNormalParams {
    alpha: f64,
    p: f64,
    mu: Vec<f64>,
    sigma: DMatrix<f64>,
    gaussian: Gaussian,
}

impl FoldedNormalParams {
    pub fn new(alpha: f64, p: f64, mu: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        if !alpha.is_finite() || !(-1.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [-1, 1], got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in [0, 1], got {p}"
            )));
        }
        if alpha == 0.0 && p != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "p must be 1 when alpha = 0, got {p}"
            )));
        }
        if mu.is_empty() {
            return Err(Error::InvalidDimension("mean vector is empty".into()));
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("mean has non-finite entries".into()));
        }
        if asymmetry(&sigma) > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "covariance is not symmetric (max asymmetry {:e})",
                asymmetry(&sigma)
            )));
        }
        let gaussian = Gaussian::new(&mu, &sigma)?;
        Ok(Self {
            alpha,
            p,
            mu,
            sigma,
            gaussian,
        })
    }

    /// Convenience constructor with Σ given row-major.
    pub fn from_rows(alpha: f64, p: f64, mu: Vec<f64>, sigma_rows: &[f64]) -> Result<Self> {
        let d = mu.len();
        if sigma_rows.len() != d * d {
            return Err(Error::InvalidDimension(format!(
                "covariance has {} entries, expected {}",
                sigma_rows.len(),
                d * d
            )));
        }
        Self::new(alpha, p, mu, DMatrix::from_row_slice(d, d, sigma_rows))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Number of composition parts `D` (one more than the dimension of μ).
    pub fn parts(&self) -> usize {
        self.mu.len() + 1
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.alpha, p, self.mu.clone(), self.sigma.clone())
    }

    pub(crate) fn gaussian(&self) -> &Gaussian {
        &self.gaussian
    }

    fn check_parts(&self, x: &Composition) -> Result<()> {
        if x.dim() != self.parts() {
            return Err(Error::InvalidDimension(format!(
                "composition has {} parts, parameters describe {}",
                x.dim(),
                self.parts()
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    alpha: f64,
    p: f64,
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

impl TryFrom<ParamsRepr> for FoldedNormalParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        let d = r.mu.len();
        if r.sigma.len() != d || r.sigma.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidDimension(format!(
                "sigma must be {d}x{d} to match mu"
            )));
        }
        let flat: Vec<f64> = r.sigma.into_iter().flatten().collect();
        FoldedNormalParams::from_rows(r.alpha, r.p, r.mu, &flat)
    }
}

impl From<FoldedNormalParams> for ParamsRepr {
    fn from(p: FoldedNormalParams) -> Self {
        let sigma = (0..p.sigma.nrows())
            .map(|i| p.sigma.row(i).iter().copied().collect())
            .collect();
        ParamsRepr {
            alpha: p.alpha,
            p: p.p,
            mu: p.mu,
            sigma,
        }
    }
}

/// Log-kernels of the two branches at a composition, Jacobians included and
/// mixing weights excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchLogDensities {
    pub log_f0: f64,
    pub log_f1: f64,
}

/// Per-point quantities shared by the density and the EM algorithm.
pub(crate) struct BranchTerms {
    /// `z_α(x)`.
    pub y_inside: Vec<f64>,
    /// `z_α(x)/w*²`; meaningless when `log_jacobian_folded` is `−∞`.
    pub y_folded: Vec<f64>,
    pub log_jacobian_inside: f64,
    /// `−∞` at the barycenter, where the folded pre-image is at infinity.
    pub log_jacobian_folded: f64,
}

pub(crate) fn branch_terms(x: &[f64], alpha: f64, helmert: &HelmertSubmatrix) -> BranchTerms {
    let parts = x.len();
    let d = parts - 1;
    let mut w = vec![0.0; parts];
    w_alpha_into(x, alpha, &mut w);
    let mut y_inside = vec![0.0; d];
    helmert.apply_into(&w, &mut y_inside);

    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let n = parts as f64;
    let log_jacobian_inside = (n - 0.5) * n.ln() + (alpha - 1.0) * logs.iter().sum::<f64>()
        - n * log_power_sum(&logs, alpha);

    let w_star = scaled_min(&w, alpha);
    let (y_folded, log_jacobian_folded) = if w_star.abs() < FOLD_SCALE_FLOOR {
        (y_inside.clone(), f64::NEG_INFINITY)
    } else {
        let scale = 1.0 / (w_star * w_star);
        (
            y_inside.iter().map(|v| v * scale).collect(),
            log_jacobian_inside - 2.0 * d as f64 * w_star.abs().ln(),
        )
    };
    BranchTerms {
        y_inside,
        y_folded,
        log_jacobian_inside,
        log_jacobian_folded,
    }
}

fn branches_with(x: &Composition, alpha: f64, gaussian: &Gaussian) -> BranchLogDensities {
    let helmert = HelmertSubmatrix::new(x.dim()).expect("D >= 2");
    let t = branch_terms(x.parts(), alpha, &helmert);
    let log_f0 = t.log_jacobian_inside + gaussian.log_pdf(&t.y_inside);
    let log_f1 = if t.log_jacobian_folded == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        t.log_jacobian_folded + gaussian.log_pdf(&t.y_folded)
    };
    BranchLogDensities { log_f0, log_f1 }
}

/// Branch log-kernels `log K₀(x)`, `log K₁(x)` for α ≠ 0.
///
/// `log_f1` is `−∞` at the barycenter, the limit of the folded kernel there.
pub fn branch_log_densities(x: &Composition, theta: &FoldedNormalParams) -> Result<BranchLogDensities> {
    if theta.alpha == 0.0 {
        return Err(Error::AlphaZero("branch_log_densities"));
    }
    theta.check_parts(x)?;
    Ok(branches_with(x, theta.alpha, &theta.gaussian))
}

/// `log(a·e^u + b·e^v)` for non-negative weights, skipping zero weights.
pub(crate) fn log_mix(p: f64, log_f0: f64, log_f1: f64) -> f64 {
    if p >= 1.0 {
        return log_f0;
    }
    if p <= 0.0 {
        return log_f1;
    }
    log_add_exp(p.ln() + log_f0, (-p).ln_1p() + log_f1)
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Log of the estimation model `p·K₀(x) + (1 − p)·K₁(x)`; the logistic
/// normal when α = 0.
///
/// With `0 < p < 1` this function integrates to `p·P(A_α) + (1 − p)·P(A_αᶜ)`
/// rather than one. Summed over the data it is the profile likelihood of α
/// reported by the EM fit.
pub fn log_density(x: &Composition, theta: &FoldedNormalParams) -> Result<f64> {
    theta.check_parts(x)?;
    if theta.alpha == 0.0 {
        return Ok(logistic_normal_with(x, &theta.gaussian));
    }
    let b = branches_with(x, theta.alpha, &theta.gaussian);
    Ok(log_mix(theta.p, b.log_f0, b.log_f1))
}

/// Log-density of `fold(Y)` for `Y ~ N(μ, Σ)`: `log(K₀(x) + K₁(x))`.
///
/// This is the two-branch mixture with each branch normalized by its
/// probability and `p` set to the mass of `A_α`; `theta.p` is not used.
/// Summed over the data it is the objective of the EM iterations.
pub fn fold_log_density(x: &Composition, theta: &FoldedNormalParams) -> Result<f64> {
    theta.check_parts(x)?;
    if theta.alpha == 0.0 {
        return Ok(logistic_normal_with(x, &theta.gaussian));
    }
    let b = branches_with(x, theta.alpha, &theta.gaussian);
    Ok(log_add_exp(b.log_f0, b.log_f1))
}

/// Logistic-normal log-density: normal log-density of the ilr coordinates
/// plus the ilr Jacobian `−½·log D − Σ log x_i`.
pub fn logistic_normal_log_density(x: &Composition, mu: &[f64], sigma: &DMatrix<f64>) -> Result<f64> {
    if mu.len() + 1 != x.dim() {
        return Err(Error::InvalidDimension(format!(
            "composition has {} parts, mean has length {}",
            x.dim(),
            mu.len()
        )));
    }
    let gaussian = Gaussian::new(mu, sigma)?;
    Ok(logistic_normal_with(x, &gaussian))
}

pub(crate) fn logistic_normal_with(x: &Composition, gaussian: &Gaussian) -> f64 {
    let helmert = HelmertSubmatrix::new(x.dim()).expect("D >= 2");
    let logs: Vec<f64> = x.parts().iter().map(|v| v.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let clr: Vec<f64> = logs.iter().map(|l| l - mean).collect();
    let y = helmert.apply(&clr);
    let d = x.dim() as f64;
    gaussian.log_pdf(&y) - 0.5 * d.ln() - logs.iter().sum::<f64>()
}

/// Draws `n` compositions: `y ~ N(μ, Σ)` followed by the folding map
/// (α ≠ 0) or the inverse clr of `Hᵀy` (α = 0). `theta.p` is not used.
pub fn sample(theta: &FoldedNormalParams, n: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = rng_from_seed(seed);
    Ok(sample_with_branches(theta, n, &mut rng)?.0)
}

/// Like [`sample`] with an explicit generator, also returning the branch of
/// every draw (always [`FoldBranch::Inside`] at α = 0).
pub fn sample_with_branches(
    theta: &FoldedNormalParams,
    n: usize,
    rng: &mut SimRng,
) -> Result<(DataMatrix, Vec<FoldBranch>)> {
    let parts = theta.parts();
    let helmert = HelmertSubmatrix::new(parts)?;
    let g = &theta.gaussian;
    let mut normals = vec![0.0; g.dim()];
    let mut y = vec![0.0; g.dim()];
    let mut v = vec![0.0; parts];
    let mut rows = Vec::with_capacity(n);
    let mut branches = Vec::with_capacity(n);
    for _ in 0..n {
        g.sample_into(rng, &mut normals, &mut y);
        helmert.apply_transpose_into(&y, &mut v);
        let (x, branch) = if theta.alpha == 0.0 {
            (softmax(&v)?, FoldBranch::Inside)
        } else {
            fold_preimage(&mut v, theta.alpha)?
        };
        rows.push(x);
        branches.push(branch);
    }
    let data = if rows.is_empty() {
        DataMatrix::empty(parts)?
    } else {
        DataMatrix::from_compositions(rows)?
    };
    Ok((data, branches))
}
