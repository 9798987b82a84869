use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field/topology mismatch: {0}")]
    TopologyMismatch(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("non-finite sample in {0} field")]
    NonFiniteField(String),

    #[error("initial state not normalized: norm = {0}")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("propagation failed: {0}")]
    Propagation(String),

    #[error("functional decreased at iteration {iteration}: {previous:.12e} -> {current:.12e}")]
    NonMonotonic {
        iteration: usize,
        previous: f64,
        current: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
