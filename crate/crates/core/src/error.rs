use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("base must be an integer at least 2 (got {0})")]
    InvalidBase(u32),

    #[error("block parameter ell must be at least 2 (got {0})")]
    InvalidEll(u32),

    #[error("the real part of s must be positive")]
    NonPositiveRealPart,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The effective geometric ratio never dropped below one.
    #[error("no convergent truncation for ell = {ell} within {max_terms} terms; use a larger ell")]
    PlanFailure { ell: u32, max_terms: usize },

    #[error("tolerance not reached within {max_terms} terms")]
    MaxTermsExceeded { max_terms: usize },

    #[error("zeta has a pole at s = 1")]
    PoleAtOne,

    #[error("every candidate base puts 1 - b^(1-s) too close to zero")]
    BaseExhausted,

    #[error("closed form evaluated too close to a pole: |b^(s+{shift}) - b| is below the safety threshold")]
    NearPole { shift: u32 },

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}
