//! Error type shared by every module of the crate.

use crate::series::Rational;

/// Failures reported by the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series is not a unit: constant term is zero")]
    NotAUnit,
    #[error("coefficient b^{index} requested beyond precision {prec}")]
    PrecisionExceeded { index: usize, prec: usize },
    #[error("operation needs precision at least {needed}, got {prec}")]
    PrecisionTooLow { needed: usize, prec: usize },
    #[error("mismatched host spaces: {0}")]
    Mismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not in the image of the shifted operator: {0}")]
    NotSolvable(String),
    #[error("factorization failed: {0}")]
    FactorizationFailed(String),
    #[error("invalid canonical point: {0}")]
    InvalidCanonicalPoint(String),
    #[error("not thematic: {0}")]
    NotThematic(String),
    #[error("wrong invariants: {0}")]
    WrongInvariants(String),
    #[error("relation series not normalized: constant term is {0}, expected 1")]
    NotNormalized(Rational),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
