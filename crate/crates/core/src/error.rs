use thiserror::Error;

/// Errors raised by the filtering, sampling and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure at step {step}: non-finite filter output")]
    NumericalFailure { step: usize },

    #[error("degenerate state at step {step}: {detail}")]
    DegenerateState { step: usize, detail: String },

    #[error("length mismatch: {params} parameter sets for {observations} observations")]
    LengthMismatch { params: usize, observations: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("too few observations: got {got}, need at least {need}")]
    TooFewObservations { got: usize, need: usize },

    #[error("no retained draws")]
    EmptyDraws,
}

pub type Result<T> = std::result::Result<T, Error>;
