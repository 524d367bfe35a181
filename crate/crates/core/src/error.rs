use thiserror::Error;

/// Errors produced by the robust PCA routines and their supporting kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no points")]
    EmptySet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("covariance ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("trim level below contamination")]
    TrimBelowContamination,

    #[error("only {found} usable candidate directions, {needed} required")]
    TooFewCandidates { needed: usize, found: usize },

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("malformed dataset: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
