use thiserror::Error;

/// Errors surfaced by the checker and constructor layers.
///
/// Low-level polynomial and tensor arithmetic panics on shape violations
/// (mismatched variable counts, out-of-range indices); those are programming
/// errors. Everything reachable from user-supplied data goes through this
/// enum instead.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("arity mismatch: expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    #[error("not an algebroid tensor: {0}")]
    NotAlgebroidTensor(String),

    /// Returned when a family satisfying the decomposable-sums hypothesis
    /// lands in neither branch of the dichotomy. Reaching this would falsify
    /// the underlying lemma, so it is kept distinct from ordinary failures.
    #[error("dichotomy violated: {0}")]
    DichotomyViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
