use thiserror::Error;

/// Errors raised by the device models, the perceptrons and the metrics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("internal variable {value} outside valid range [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("update {delta} on variable {index} does not fit the addressing window of width {width}")]
    WindowViolation { index: usize, delta: f64, width: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("variable index {index} out of range for {len} internal variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("labels contain a single class; rates are undefined")]
    SingleClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-binary input value {0}")]
    NonBinary(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
