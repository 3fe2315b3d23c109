use thiserror::Error;

use crate::lattice::WaveVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("wave vector must be nonzero")]
    ZeroWaveVector,
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },
    #[error("mode set is not closed under negation (missing {0})")]
    NotNegationClosed(WaveVector),
    #[error("expected between 2 and 4 factors, got {0}")]
    FactorCount(usize),
    #[error("moment order must be even and at most 6, got {0}")]
    MomentOrder(usize),
    #[error("mode {0} is not part of the field's mode set")]
    SupportMismatch(WaveVector),
    #[error("noise mode {0} lies outside the state box")]
    OutsideBox(WaveVector),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("exact arithmetic requires an integer exponent, got {0}")]
    InexactExponent(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

impl Error {
    pub fn invalid(name: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            constraint: constraint.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
