use thiserror::Error;

/// Errors surfaced by instance validation, solvers, the oracle, and the simulator.
#[derive(Debug, Error)]
pub enum FaclocError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("structural error in solution: {0}")]
    Structural(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("{0}")]
    BadArgument(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("accounting violation: {0}")]
    AccountingViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FaclocError>;
