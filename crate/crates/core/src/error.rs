use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// α = 0 was passed to a map that only exists for α ≠ 0.
    #[error("alpha must be non-zero for {0}; use the log-ratio form at alpha = 0")]
    AlphaZero(&'static str),

    /// A point outside `A_α` was passed to the unfolded inverse.
    #[error("point lies outside the alpha-region (min 1 + alpha*w = {min_margin:e})")]
    OutOfRegion { min_margin: f64 },

    #[error("folded point still outside the alpha-region (min 1 + alpha*w = {min_margin:e})")]
    FoldFailure { min_margin: f64 },

    /// The fold scale w* (or q*) vanished, which happens only at the barycenter.
    #[error("singular fold: fold scale {0:e} is numerically zero")]
    SingularFold(f64),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("non-finite value: {0}")]
    NumericFailure(String),

    #[error("profile log-likelihood is not concave at alpha = {alpha}: second difference {second_difference:e}")]
    NonConcaveProfile { alpha: f64, second_difference: f64 },

    #[error("fit did not converge: {0}")]
    NotConverged(String),

    #[error("bootstrap replicate {replicate} failed after {attempts} attempts: {source}")]
    BootstrapFailure {
        replicate: usize,
        attempts: usize,
        source: Box<Error>,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
