mod common;

use common::*;
use folded_simplex::estimation::{default_alpha_grid, DEFAULT_MAX_ITER, DEFAULT_TOL};
use folded_simplex::*;

fn fig1_data(alpha: f64, n: usize, seed: u64) -> DataMatrix {
    sample(&fig1(alpha, 1.0), n, seed).unwrap()
}

#[test]
fn em_trace_is_monotone() {
    for (alpha, seed) in [(1.0, 1), (0.5, 2), (-0.5, 3), (0.3, 4)] {
        let data = fig1_data(alpha, 400, seed);
        let fit = em_fit(&data, alpha, 1e-8, 1000).unwrap();
        assert!(fit.converged);
        for w in fit.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "α={alpha}: {} then {}", w[0], w[1]);
        }
        // the mixture never exceeds the folded density
        assert!(fit.log_likelihood <= fit.trace.last().unwrap() + 1e-9);
    }
}

#[test]
fn responsibilities_average_to_p() {
    let data = fig1_data(1.0, 300, 5);
    let fit = em_fit(&data, 1.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let mean = fit.responsibilities.iter().sum::<f64>() / 300.0;
    assert!((mean - fit.params.p()).abs() < 1e-12);
    assert!(fit.responsibilities.iter().all(|t| (0.0..=1.0).contains(t)));
}

#[test]
fn row_order_does_not_matter() {
    let data = fig1_data(0.5, 250, 6);
    let mut order: Vec<usize> = (0..250).collect();
    order.reverse();
    order.swap(3, 100);
    let shuffled = data.select_rows(&order);
    let a = em_fit(&data, 0.5, 1e-10, 2000).unwrap();
    let b = em_fit(&shuffled, 0.5, 1e-10, 2000).unwrap();
    assert!((a.log_likelihood - b.log_likelihood).abs() < 1e-10 * a.log_likelihood.abs().max(1.0));
    for (x, y) in a.params.mu().iter().zip(b.params.mu()) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn warm_restart_keeps_the_objective() {
    let data = fig1_data(1.0, 300, 7);
    let fit = em_fit(&data, 1.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let again = em_fit_from(&data, 1.0, &fit.params, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let (a, b) = (again.trace.last().unwrap(), fit.trace.last().unwrap());
    assert!((a - b).abs() < DEFAULT_TOL, "{a} vs {b}");
    assert!(again.iterations <= fit.iterations);
}

#[test]
fn profile_is_continuous_at_zero() {
    let data = fig1_data(0.3, 300, 8);
    let l0 = profile_loglik(&data, 0.0).unwrap();
    for a in [1e-4, -1e-4] {
        let la = profile_loglik(&data, a).unwrap();
        assert!(rel_err(la, l0) < 1e-3, "ℓ({a}) = {la}, ℓ(0) = {l0}");
    }
}

#[test]
fn profile_is_finite_and_peaks_inside() {
    let data = fig1_data(0.5, 500, 9);
    let res = fit_alpha(&data, &default_alpha_grid(), true).unwrap();
    assert!(res.profile.iter().all(|(_, l)| l.is_finite()));
    assert!(res.profile.len() >= 41);
    let best = res.profile.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best, res.best_fit.log_likelihood);
    assert!((res.best_alpha - 0.5).abs() < 0.2, "{}", res.best_alpha);
    assert!(res.profile.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn alpha_is_recovered_on_large_samples() {
    let theta = design(0.5, &MU_NEG, 1.0);
    let data = sample(&theta, 20_000, 10).unwrap();
    let search = AlphaSearch::with_step(0.1).unwrap();
    let res = fit_alpha_with(&data, &search).unwrap();
    assert!((res.best_alpha - 0.5).abs() < 0.05, "{}", res.best_alpha);
}

#[test]
fn estimated_p_matches_induced_probability() {
    let theta = design(0.5, &MU_POS, 1.0);
    let truth = 1.0 - outside_probability(&theta, 1_000_000, 11).unwrap().total;
    let data = sample(&theta, 10_000, 12).unwrap();
    let fit = em_fit(&data, 0.5, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!((fit.params.p() - truth).abs() <= 0.02, "p̂ = {}, p = {truth}", fit.params.p());
}

#[test]
fn alpha_zero_fit_matches_logistic_normal_density() {
    let data = fig1_data(0.0, 200, 13);
    let fit = loglik_alpha0(&data).unwrap();
    let direct: f64 = data
        .compositions()
        .map(|x| logistic_normal_log_density(&x, fit.params.mu(), fit.params.sigma()).unwrap())
        .sum();
    assert!((direct - fit.log_likelihood).abs() < 1e-8);
    assert_eq!(fit.params.p(), 1.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    let data = fig1_data(1.0, 50, 14);
    assert!(matches!(em_fit(&data, 0.0, 1e-6, 100), Err(Error::AlphaZero(_))));
    assert!(em_fit(&data, 1.5, 1e-6, 100).is_err());
    assert!(em_fit(&data, 1.0, 0.0, 100).is_err());
    let two = data.select_rows(&[0, 1]);
    assert!(matches!(em_fit(&two, 1.0, 1e-6, 100), Err(Error::SingularCovariance(_))));
    assert!(fit_alpha(&data, &[], true).is_err());
    assert!(fit_alpha(&data, &[2.0], true).is_err());
}
