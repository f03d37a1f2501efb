use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: `{0}` vs `{1}`")]
    BasisMismatch(String, String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("phase overflow: {0}")]
    Overflow(String),
    #[error("dependent parameters: {0}")]
    Dependent(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
