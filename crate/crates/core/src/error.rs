use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("alltop sequences require a prime length N >= 5, got N = {0}")]
    NotPrime(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("basis is rank deficient (column {0} has a vanishing orthogonal component)")]
    RankDeficient(usize),

    #[error("lattice reduction did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("spreading factor N = {n} exceeds preamble count L = {l}; the model requires N <= L")]
    SpreadingExceedsPreambles { n: usize, l: usize },

    #[error("could not draw a slot with the requested collision pattern after {0} attempts")]
    CompositionUnreachable(usize),

    #[error("unknown scenario preset `{0}`")]
    UnknownPreset(String),

    #[error("invariant violated in slot {slot}: {what}")]
    InvariantViolation { slot: u64, what: String },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
