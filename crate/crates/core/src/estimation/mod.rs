//! Maximum-likelihood estimation: EM for a fixed α and profile search over α.

mod brent;
mod em;
mod profile;

pub(crate) use brent::brent_maximize;
pub use em::{em_fit, em_fit_from, loglik_alpha0, FitResult, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use profile::{
    default_alpha_grid, fit_alpha, fit_alpha_with, profile_loglik, AlphaSearch, AlphaSearchResult,
};
