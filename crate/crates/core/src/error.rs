//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two polynomials (or a polynomial and a vector) live over different
    /// coefficient rings or mode dimensions.
    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("mode index {index} out of range for dimension {d}")]
    ModeOutOfRange { index: usize, d: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter violates a precondition (e.g. |q| must be < 1).
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("division by zero")]
    DivisionByZero,

    /// A positivity requirement failed: the requested functional is not a
    /// state (its Gram matrix has a genuinely negative eigenvalue).
    #[error("not a state: {0}")]
    NotAState(String),

    /// A bilinear form fails the admissibility bound |theta(f,g)| <= |f||g|.
    #[error("inadmissible bilinear form: {0}")]
    Inadmissible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
