use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("conjugation condition violated: {0}")]
    ConditionViolated(&'static str),

    #[error("symbol invariant violated: {0}")]
    InvariantViolated(&'static str),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("not applicable: {0}")]
    Inapplicable(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("truncation mismatch: input has {input} coefficients, operator acts on {trunc}")]
    TruncationMismatch { input: usize, trunc: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
