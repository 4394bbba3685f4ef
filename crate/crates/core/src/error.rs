use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row {row}: norm {norm} is not within 1e-6 of 1")]
    NotUnit { row: usize, norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dual set is empty: the spherical hull is the whole sphere")]
    DualEmpty,

    #[error("degenerate hull: generators span {rank} of {dim} dimensions")]
    DegenerateHull { rank: usize, dim: usize },

    #[error("degenerate subset: Gram matrix is numerically singular")]
    DegenerateSubset,

    #[error("instance too large for exhaustive enumeration: {subsets} subsets exceeds {limit}")]
    TooLarge { subsets: u128, limit: u128 },

    #[error("SIC solver did not converge; rho bracketed in [{lower}, {upper}]")]
    NonConvergence { lower: f64, upper: f64 },

    #[error("simplex iteration guard exceeded after {0} pivots")]
    CyclingGuard(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{failed} of {total} samples failed to solve (limit 0.1%)")]
    TooManyFailures { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
