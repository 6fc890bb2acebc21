use thiserror::Error;

/// Errors raised by the library. Each variant corresponds to one failure class
/// that callers (notably the CLI) map onto distinct outcomes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid population structure: {0}")]
    InvalidStructure(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max |S - S^T| = {0:e})")]
    Symmetry(f64),

    #[error("model error: {0}")]
    Model(String),

    #[error("cannot normalize game: {0}")]
    Normalization(String),

    #[error("step failed in population {population}: {reason}")]
    Step { population: usize, reason: String },

    #[error("state is a fixed point of the dynamic")]
    FixedPoint,

    #[error("line search exhausted {halvings} halvings without acceptance")]
    LineSearchExhausted { halvings: u32 },

    #[error("ESS-oracle step bound inapplicable: {0}")]
    OracleInapplicable(String),

    #[error("rate error: {0}")]
    Rate(String),

    #[error("support violation: {0}")]
    Support(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate pair: the two flows coincide")]
    DegeneratePair,

    #[error("invalid step rule: {0}")]
    InvalidStepRule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
