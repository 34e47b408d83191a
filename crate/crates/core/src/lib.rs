//! The α-folded multivariate normal model for compositional data.
//!
//! Compositions (strictly positive vectors with unit sum) are mapped to
//! ℝ^{D−1} by the α-transformation, a Box-Cox type power map that reduces to
//! the isometric log-ratio transform as α → 0. The image of the simplex is a
//! bounded region `A_α` for α ≠ 0, so a normal distribution placed on ℝ^{D−1}
//! leaves mass outside it. The folding map sends those points back into the
//! simplex, which gives a two-branch density on the simplex.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: Helmert sub-matrix, clr/α-transforms, folding and Jacobians.
//! * [`model`]: parameters, branch densities, log-density and sampling.
//! * [`estimation`]: EM for fixed α, profile likelihood and α search.
//! * [`inference`]: bootstrap tests and intervals for α, outside probability.
//! * [`analysis`]: α-means, simplex PCA, contour grids, metrics, recovery study.
//! * [`io`]: dataset files, CSV helpers and the bundled Arctic lake data.

pub mod analysis;
pub mod data;
pub mod datasets;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod inference;
pub mod io;
mod linalg;
pub mod model;
pub mod seed;

pub use analysis::{
    contour_grid, covariance_distance, frechet_mean, mean_distance, recovery_study, simplex_pca,
    ContourGrid, SimplexPca, StudyConfig, StudyReport, StudyRow,
};
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use estimation::{
    em_fit, em_fit_from, fit_alpha, fit_alpha_with, loglik_alpha0, profile_loglik, AlphaSearch,
    AlphaSearchResult, FitResult,
};
pub use geometry::{
    clr, clr_inverse, fold, helmert_submatrix, in_alpha_region, log_jacobian_g0, log_jacobian_g1,
    unfold, w_alpha, w_alpha_inverse, z_alpha, z_alpha_inverse, Composition, EuclideanPoint,
    FoldBranch, HelmertSubmatrix, ZeroSumVector,
};
pub use inference::{
    bootstrap_ci_alpha, bootstrap_test_alpha, curvature_ci_alpha, outside_probability,
    BootstrapOptions, BootstrapStatistic, BootstrapTestResult, Interval, OutsideProbability,
};
pub use model::{
    branch_log_densities, fold_log_density, log_density, logistic_normal_log_density, sample,
    BranchLogDensities, FoldedNormalParams,
};
