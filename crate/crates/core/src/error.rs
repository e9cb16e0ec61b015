use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dyadic index (level {level}, shift {shift})")]
    InvalidIndex { level: u32, shift: i64 },

    #[error("covariance is not positive semidefinite: {0}")]
    NotPsd(String),

    /// Non-finite coefficients appeared while integrating.
    #[error("numerical divergence at step {step}")]
    Divergence { step: usize },

    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate sample: {0} (see atom_test)")]
    Degenerate(String),

    #[error("uncoupled inputs: {0}")]
    Uncoupled(String),

    #[error("ensemble exclusion rate {excluded}/{total} exceeds 1%")]
    ExcessiveExclusion { excluded: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
