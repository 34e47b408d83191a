use nalgebra::DMatrix;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::geometry::HelmertSubmatrix;
use crate::linalg::Gaussian;
use crate::model::{branch_terms, log_add_exp, log_mix, logistic_normal_with, FoldedNormalParams};

/// Convergence threshold on successive log-likelihoods.
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Output of an EM run (or of the closed-form fit at α = 0).
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: FoldedNormalParams,
    /// Posterior probability that each row came from the inside branch.
    pub responsibilities: Vec<f64>,
    /// `Σ log(p·f₀ + (1 − p)·f₁)` at the final estimates; the profile
    /// likelihood of α.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// EM objective `Σ log(f₀ + f₁)` after every M-step; non-decreasing.
    pub trace: Vec<f64>,
}

/// Branch coordinates and log-Jacobians of every row, fixed for a given α.
pub(crate) struct Prepared {
    pub n: usize,
    pub d: usize,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub lj0: Vec<f64>,
    pub lj1: Vec<f64>,
}

impl Prepared {
    pub(crate) fn new(data: &DataMatrix, alpha: f64) -> Result<Self> {
        let parts = data.parts();
        let d = parts - 1;
        let n = data.n_rows();
        let helmert = HelmertSubmatrix::new(parts)?;
        let mut y1 = Vec::with_capacity(n * d);
        let mut y2 = Vec::with_capacity(n * d);
        let mut lj0 = Vec::with_capacity(n);
        let mut lj1 = Vec::with_capacity(n);
        for row in data.rows() {
            let t = branch_terms(row, alpha, &helmert);
            if !t.log_jacobian_inside.is_finite() || t.y_inside.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericFailure(format!(
                    "non-finite alpha-transform at alpha = {alpha}"
                )));
            }
            y1.extend_from_slice(&t.y_inside);
            y2.extend_from_slice(&t.y_folded);
            lj0.push(t.log_jacobian_inside);
            lj1.push(t.log_jacobian_folded);
        }
        Ok(Self { n, d, y1, y2, lj0, lj1 })
    }

    fn y1(&self, i: usize) -> &[f64] {
        &self.y1[i * self.d..(i + 1) * self.d]
    }

    fn y2(&self, i: usize) -> &[f64] {
        &self.y2[i * self.d..(i + 1) * self.d]
    }

    /// Branch log-densities of every row under `g`.
    fn branch_logs(&self, g: &Gaussian, f0: &mut [f64], f1: &mut [f64]) {
        let mut scratch = vec![0.0; self.d];
        for i in 0..self.n {
            f0[i] = self.lj0[i] + g.log_pdf_with(self.y1(i), &mut scratch);
            f1[i] = if self.lj1[i] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                self.lj1[i] + g.log_pdf_with(self.y2(i), &mut scratch)
            };
        }
    }

    /// Weighted mean and n-denominator covariance over both branches.
    fn m_step(&self, t: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let (n, d) = (self.n, self.d);
        let mut mu = vec![0.0; d];
        for i in 0..n {
            let (a, b) = (self.y1(i), self.y2(i));
            let s = 1.0 - t[i];
            for k in 0..d {
                mu[k] += t[i] * a[k];
                if s > 0.0 {
                    mu[k] += s * b[k];
                }
            }
        }
        mu.iter_mut().for_each(|m| *m /= n as f64);
        let mut cov = DMatrix::zeros(d, d);
        let mut r = vec![0.0; d];
        for i in 0..n {
            for (branch, weight) in [(self.y1(i), t[i]), (self.y2(i), 1.0 - t[i])] {
                if weight <= 0.0 {
                    continue;
                }
                for k in 0..d {
                    r[k] = branch[k] - mu[k];
                }
                for a in 0..d {
                    for b in 0..=a {
                        cov[(a, b)] += weight * r[a] * r[b];
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..=a {
                let v = cov[(a, b)] / n as f64;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        (mu, cov)
    }
}

fn degenerate(e: Error) -> Error {
    match e {
        Error::NotPositiveDefinite(m) | Error::SingularCovariance(m) => {
            Error::SingularCovariance(format!("covariance update is degenerate: {m}"))
        }
        other => other,
    }
}

fn check_input(data: &DataMatrix, alpha: f64, tol: f64) -> Result<()> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero("em_fit (use loglik_alpha0)"));
    }
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [-1, 1], got {alpha}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if data.n_rows() < data.parts() {
        return Err(Error::SingularCovariance(format!(
            "{} rows cannot determine a {}-dimensional covariance",
            data.n_rows(),
            data.parts() - 1
        )));
    }
    Ok(())
}

/// EM for the folded model at fixed α ≠ 0.
///
/// μ⁰ and Σ⁰ are the mean and covariance of the inside-branch coordinates
/// `y₁ = z_α(x)`. Each iteration sets `t = f₀/(f₀ + f₁)` from the current
/// branch densities (Jacobians included), `p = mean(t)`, and performs the
/// weighted M-step over `y₁` and `y₂ = y₁/w*²`. These are exact EM steps
/// for `Σ log(f₀ + f₁)`, the log-density of the folded normal, which every
/// iteration increases; iteration stops when successive values differ by
/// less than `tol`. The reported log-likelihood is the mixture
/// `Σ log(p·f₀ + (1 − p)·f₁)` at the final estimates.
///
/// With `max_iter = 0` the initial values are returned unchanged.
pub fn em_fit(data: &DataMatrix, alpha: f64, tol: f64, max_iter: usize) -> Result<FitResult> {
    check_input(data, alpha, tol)?;
    let prep = Prepared::new(data, alpha)?;
    let n = prep.n;
    let (mu0, sigma0) = prep.m_step(&vec![1.0; n]);
    let g0 = Gaussian::new(&mu0, &sigma0).map_err(degenerate)?;
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    prep.branch_logs(&g0, &mut f0, &mut f1);
    let t0: Vec<f64> = f0
        .iter()
        .zip(&f1)
        .map(|(&a, &b)| responsibility(a, b))
        .collect();
    if max_iter == 0 {
        let p0 = mean(&t0);
        let objective: f64 = (0..n).map(|i| log_add_exp(f0[i], f1[i])).sum();
        let ll: f64 = (0..n).map(|i| log_mix(p0, f0[i], f1[i])).sum();
        let params = FoldedNormalParams::new(alpha, p0, mu0, sigma0)?;
        return Ok(FitResult {
            params,
            responsibilities: t0,
            log_likelihood: ll,
            iterations: 0,
            converged: false,
            trace: vec![objective],
        });
    }
    run(&prep, alpha, t0, tol, max_iter)
}

/// EM started from given parameters: the first E-step uses `start`.
pub fn em_fit_from(
    data: &DataMatrix,
    alpha: f64,
    start: &FoldedNormalParams,
    tol: f64,
    max_iter: usize,
) -> Result<FitResult> {
    check_input(data, alpha, tol)?;
    if start.parts() != data.parts() {
        return Err(Error::InvalidDimension(format!(
            "start has {} parts, data has {}",
            start.parts(),
            data.parts()
        )));
    }
    let prep = Prepared::new(data, alpha)?;
    let mut f0 = vec![0.0; prep.n];
    let mut f1 = vec![0.0; prep.n];
    prep.branch_logs(start.gaussian(), &mut f0, &mut f1);
    let t: Vec<f64> = (0..prep.n).map(|i| responsibility(f0[i], f1[i])).collect();
    run(&prep, alpha, t, tol, max_iter.max(1))
}

fn run(prep: &Prepared, alpha: f64, mut t: Vec<f64>, tol: f64, max_iter: usize) -> Result<FitResult> {
    let n = prep.n;
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut last = None;
    for _ in 0..max_iter {
        let p = mean(&t).clamp(0.0, 1.0);
        let (mu, sigma) = prep.m_step(&t);
        let g = Gaussian::new(&mu, &sigma).map_err(degenerate)?;
        prep.branch_logs(&g, &mut f0, &mut f1);
        let ll: f64 = (0..n).map(|i| log_add_exp(f0[i], f1[i])).sum();
        if !ll.is_finite() {
            return Err(Error::NumericFailure(format!(
                "log-likelihood is {ll} at alpha = {alpha}"
            )));
        }
        let done = trace.last().is_some_and(|prev: &f64| (ll - prev).abs() < tol);
        trace.push(ll);
        let next: Vec<f64> = (0..n).map(|i| responsibility(f0[i], f1[i])).collect();
        last = Some((mu, sigma, p, std::mem::replace(&mut t, next)));
        if done {
            converged = true;
            break;
        }
    }
    let (mu, sigma, p, used) = last.expect("at least one iteration");
    let log_likelihood: f64 = (0..n).map(|i| log_mix(p, f0[i], f1[i])).sum();
    if !log_likelihood.is_finite() {
        return Err(Error::NumericFailure(format!(
            "log-likelihood is {log_likelihood} at alpha = {alpha}"
        )));
    }
    let params = FoldedNormalParams::new(alpha, p, mu, sigma)?;
    Ok(FitResult {
        params,
        responsibilities: used,
        log_likelihood,
        iterations: trace.len(),
        converged,
        trace,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `e^a / (e^a + e^b)`.
fn responsibility(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return 0.5;
    }
    if b == f64::NEG_INFINITY {
        return 1.0;
    }
    1.0 / (1.0 + (b - a).exp())
}

/// Closed-form fit at α = 0: mean and n-denominator covariance of the ilr
/// coordinates, `p = 1`, all responsibilities 1.
pub fn loglik_alpha0(data: &DataMatrix) -> Result<FitResult> {
    let parts = data.parts();
    let d = parts - 1;
    let n = data.n_rows();
    if n <= d {
        return Err(Error::SingularCovariance(format!(
            "{n} rows cannot determine a {d}-dimensional covariance"
        )));
    }
    let helmert = HelmertSubmatrix::new(parts)?;
    let mut ys = Vec::with_capacity(n * d);
    let mut clr = vec![0.0; parts];
    let mut y = vec![0.0; d];
    for row in data.rows() {
        let m = row.iter().map(|v| v.ln()).sum::<f64>() / parts as f64;
        for (c, v) in clr.iter_mut().zip(row) {
            *c = v.ln() - m;
        }
        helmert.apply_into(&clr, &mut y);
        ys.extend_from_slice(&y);
    }
    let prep = Prepared {
        n,
        d,
        y2: ys.clone(),
        y1: ys,
        lj0: Vec::new(),
        lj1: Vec::new(),
    };
    let (mu, sigma) = prep.m_step(&vec![1.0; n]);
    let params = FoldedNormalParams::new(0.0, 1.0, mu, sigma).map_err(degenerate)?;
    let ll: f64 = data
        .compositions()
        .map(|x| logistic_normal_with(&x, params.gaussian()))
        .sum();
    if !ll.is_finite() {
        return Err(Error::NumericFailure(format!("log-likelihood is {ll} at alpha = 0")));
    }
    Ok(FitResult {
        params,
        responsibilities: vec![1.0; n],
        log_likelihood: ll,
        iterations: 0,
        converged: true,
        trace: vec![ll],
    })
}
