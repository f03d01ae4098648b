use thiserror::Error;

/// Errors produced by the capacity solvers and their inputs.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the constraints of a profile or pulse shape.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numeric argument is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed a configured resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The operation is not supported for these inputs (e.g. the brute-force
    /// oracle on long periods).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An internal invariant failed. Reaching this is a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
