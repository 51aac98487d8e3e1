use thiserror::Error;

/// Errors shared by the geometry, fitness and optimizer modules.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A vector or table did not match the problem dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
