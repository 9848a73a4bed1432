use thiserror::Error;

/// Errors produced by the shape likelihood library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("non-normalizable likelihood: {0}")]
    NonNormalizable(String),

    #[error("impossible configuration: every Monte Carlo draw has zero likelihood")]
    AllDrawsImpossible,

    #[error("quadrature did not converge: coarse {coarse}, refined {refined}")]
    NonConvergence { coarse: f64, refined: f64 },

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
