use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by dataset handling, the solver and the evaluation code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid presence mask: {0}")]
    Mask(String),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("degenerate graph update at view {view}, sample {sample}: denominator is zero")]
    DegenerateDenominator { view: usize, sample: usize },

    #[error("SVD failed to converge: {0}")]
    Svd(String),

    #[error("non-finite objective at iteration {iteration}")]
    NumericalAbort { iteration: usize },

    #[error("constraint violated: {0}")]
    Invariant(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid labels: {0}")]
    Labels(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalAbort { .. } | Error::Svd(_) | Error::NonFinite(_)
        )
    }
}
