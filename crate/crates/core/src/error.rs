use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid cost model: {0}")]
    InvalidCost(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("field has zero total mass")]
    AllZeroInput,
    #[error("field has a negative value {value} at node {index}")]
    NegativeInput { index: usize, value: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("density is not a valid probability density: {0}")]
    InfeasibleInput(String),
    #[error("non-finite value encountered: {0}")]
    NumericalBlowup(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("interpolation time {0} outside [0, 1]")]
    TOutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
