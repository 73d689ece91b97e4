use thiserror::Error;

/// Errors raised by library operations. Divergent potentials are values
/// (`f64::INFINITY`), not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("weight at atom {index} {point:?} is {value}; must be finite and nonnegative")]
    BadWeight {
        index: usize,
        point: Vec<f64>,
        value: f64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("tabulated function is not defined at {0:?}")]
    NotTabulated(Vec<f64>),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
