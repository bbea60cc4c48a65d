use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular (pivot {pivot:e} at step {index})")]
    SingularMatrix { index: usize, pivot: f64 },

    #[error("zero diagonal entry at row {index}")]
    ZeroDiagonal { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("{what}: power iteration did not converge in {iterations} steps (best estimate {best_estimate})")]
    NoConvergence {
        what: String,
        best_estimate: f64,
        iterations: usize,
    },

    #[error("iterate became non-finite at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("right-hand side is zero; absolute residual is {absolute:e}")]
    ZeroRightHandSide { absolute: f64 },

    #[error("relaxation parameter theta must be nonnegative, got {0}")]
    NegativeTheta(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for enumeration: n = {n} exceeds {max}")]
    TooLarge { n: usize, max: usize },

    #[error("instance too small: {0}")]
    TooSmall(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("every point of the tau grid diverged or failed")]
    AllDiverged,

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("problem manifest does not name part `{0}`")]
    MissingPart(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
