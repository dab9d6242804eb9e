use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("problem size {n} exceeds the exact-solver limit of {limit}; use an approximate solver")]
    TooLarge { n: usize, limit: usize },

    #[error("unknown solver `{0}` (expected exact, spectral or graduated)")]
    UnknownSolver(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Coarse classification used by the command-line exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Numeric(_) | Error::Degenerate(_) => ErrorKind::Numeric,
            Error::UnknownSolver(_) | Error::TooLarge { .. } => ErrorKind::Usage,
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}
