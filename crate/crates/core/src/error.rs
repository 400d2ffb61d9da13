use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain of {func}")]
    Domain { func: &'static str, value: f64 },

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderOutOfRange { order: i32, max: i32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coincident points: |x - y| = {distance:e}")]
    CoincidentPoints { distance: f64 },

    #[error("point ({x}, {y}) {reason}")]
    PointOutOfRange { x: f64, y: f64, reason: &'static str },

    #[error("modal matrix of order {order} is singular (condition number {condition:e})")]
    SingularModalMatrix { order: i32, condition: f64 },

    #[error("forward solver residual {residual:e} exceeds tolerance {tolerance:e} (source index {source_index})")]
    SolverResidual {
        residual: f64,
        tolerance: f64,
        source_index: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
