#![allow(dead_code)]

use folded_simplex::seed::{rng_from_seed, SimRng};
use folded_simplex::{unfold, z_alpha, Composition, FoldBranch, FoldedNormalParams};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

pub const MU_FIG1: [f64; 2] = [0.561, 0.547];
pub const SIGMA1: [f64; 4] = [0.5, 0.25, 0.25, 0.35];

pub const MU_NEG: [f64; 4] = [1.715, 0.914, 0.115, 0.167];
pub const MU_POS: [f64; 4] = [-0.566, -0.979, -0.648, -0.651];
pub const SIGMA0: [f64; 16] = [
    0.149, -0.458, 0.002, -0.005, //
    -0.458, 1.523, 0.000, 0.007, //
    0.002, 0.000, 0.037, -0.047, //
    -0.005, 0.007, -0.047, 0.061,
];

pub fn fig1(alpha: f64, scale: f64) -> FoldedNormalParams {
    let s: Vec<f64> = SIGMA1.iter().map(|v| v * scale).collect();
    FoldedNormalParams::from_rows(alpha, 1.0, MU_FIG1.to_vec(), &s).unwrap()
}

pub fn design(alpha: f64, mu: &[f64], kappa: f64) -> FoldedNormalParams {
    let s: Vec<f64> = SIGMA0.iter().map(|v| v * kappa).collect();
    FoldedNormalParams::from_rows(alpha, 1.0, mu.to_vec(), &s).unwrap()
}

/// Closure of iid uniform(0.02, 1) parts.
pub fn random_composition(rng: &mut impl Rng, d: usize) -> Composition {
    let parts: Vec<f64> = (0..d).map(|_| rng.random_range(0.02..1.0)).collect();
    Composition::closure(parts).unwrap()
}

/// Draw from Dirichlet(a, …, a) via normalized gammas.
pub fn dirichlet(rng: &mut SimRng, a: f64, d: usize) -> Vec<f64> {
    let g = Gamma::new(a, 1.0).unwrap();
    let v: Vec<f64> = (0..d).map(|_| g.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// |det| of the central-difference Jacobian of `f: ℝᵐ → ℝᵐ` at `p`, with a
/// per-coordinate step `h·max(1, |p_k|)`.
pub fn fd_abs_det(f: impl Fn(&[f64]) -> Vec<f64>, p: &[f64], h: f64) -> f64 {
    let m = p.len();
    let mut j = DMatrix::zeros(m, m);
    for k in 0..m {
        let step = h * p[k].abs().max(1.0);
        let mut hi = p.to_vec();
        let mut lo = p.to_vec();
        hi[k] += step;
        lo[k] -= step;
        let (fh, fl) = (f(&hi), f(&lo));
        for r in 0..m {
            j[(r, k)] = (fh[r] - fl[r]) / (2.0 * step);
        }
    }
    j.determinant().abs()
}

/// Composition from its first `D − 1` parts.
pub fn from_free(u: &[f64]) -> Composition {
    let mut parts = u.to_vec();
    parts.push(1.0 - u.iter().sum::<f64>());
    Composition::new(parts).unwrap()
}

/// |det d z_α/dx| over the first `D − 1` parts, by finite differences.
pub fn fd_inside_det(x: &Composition, alpha: f64) -> f64 {
    let free = &x.parts()[..x.dim() - 1];
    fd_abs_det(|u| z_alpha(&from_free(u), alpha).into_inner(), free, 1e-6)
}

/// |det d fold(y)/dy| at `y = unfold(x, folded)`, by finite differences.
pub fn fd_fold_det(x: &Composition, alpha: f64) -> f64 {
    let y = unfold(x, alpha, FoldBranch::Folded).unwrap();
    let d = x.dim();
    fd_abs_det(
        |v| {
            let p = folded_simplex::EuclideanPoint::new(v.to_vec()).unwrap();
            let (c, branch) = folded_simplex::fold(&p, alpha).unwrap();
            assert_eq!(branch, FoldBranch::Folded);
            c.parts()[..d - 1].to_vec()
        },
        y.values(),
        1e-6,
    )
}

fn dirichlet_log_pdf(x: &[f64], a: f64) -> f64 {
    let d = x.len() as f64;
    ln_gamma(a * d) - d * ln_gamma(a) + (a - 1.0) * x.iter().map(|v| v.ln()).sum::<f64>()
}

/// Importance-sampling estimate of ∫ exp(log_f) over S², drawing from an
/// even mixture of Dirichlet(1,1,1) and Dirichlet(a,a,a) with a < 1 so the
/// edges are covered.
pub fn mass(log_f: impl Fn(&Composition) -> f64, draws: usize, seed: u64) -> (f64, f64) {
    const A: f64 = 0.4;
    let mut rng = rng_from_seed(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for k in 0..draws {
        let parts = dirichlet(&mut rng, if k % 2 == 0 { 1.0 } else { A }, 3);
        let q = 0.5 * 2.0 + 0.5 * dirichlet_log_pdf(&parts, A).exp();
        let x = Composition::new(parts).unwrap();
        let w = (log_f(&x) - q.ln()).exp();
        s += w;
        s2 += w * w;
    }
    let m = s / draws as f64;
    let se = ((s2 / draws as f64 - m * m) / draws as f64).sqrt();
    (m, se)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Prints and returns an acceptance line.
pub fn report(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "[{}] criterion {id}: {name} :: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}
