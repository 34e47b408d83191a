//! Post-fit analysis: α-means, simplex PCA, density grids, error metrics and
//! the parameter-recovery study.

mod contour;
mod metrics;
mod pca;
mod study;

pub use contour::{contour_grid, ContourGrid, ContourNode, BOUNDARY_MARGIN};
pub use metrics::{covariance_distance, mean_distance};
pub use pca::{frechet_mean, simplex_pca, PcCurve, SimplexPca, PC_CURVE_POINTS};
pub use study::{recovery_study, StudyConfig, StudyReport, StudyRow};
