use thiserror::Error;

use crate::linalg::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid potential family: {0}")]
    InvalidFamily(String),

    #[error("level {requested} is out of range: the family supports {available} bound excited levels")]
    LevelOutOfRange { requested: usize, available: usize },

    #[error("index {0} is invalid: parameter and remainder indices start at 1")]
    InvalidIndex(usize),

    #[error("negative drive strength Omega = {0}; Omega must be >= 0")]
    NegativeDriveStrength(f64),

    #[error("{operation} is not supported for the {family} family (analytic-only family)")]
    UnsupportedFamily {
        family: &'static str,
        operation: &'static str,
    },

    #[error("grid has {n_points} interior points; at least {min} are required")]
    GridTooCoarse { n_points: usize, min: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("level matching failed: {0}")]
    MatchFailure(String),

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl Error {
    /// True for numerical failures (eigensolver divergence, non-finite
    /// matrices) as opposed to domain or contract violations.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Linalg(_))
    }
}
