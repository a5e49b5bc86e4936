use thiserror::Error;

/// Errors produced by the testing pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IhwError {
    #[error("input is empty")]
    EmptyInput,

    #[error("p-value at index {index} is outside [0, 1]: {value}")]
    PValueOutOfRange { index: usize, value: f64 },

    #[error("covariates mix numeric and categorical values")]
    MixedCovariateKinds,

    #[error("fold {fold} has no hypotheses")]
    EmptyFold { fold: usize },

    #[error("invalid fold label {label} at index {index}; labels must be in 1..=K")]
    InvalidFoldLabel { index: usize, label: usize },

    #[error("fold labels are required but missing for at least one hypothesis")]
    MissingFoldLabels,

    #[error("cannot split {m} hypotheses into {folds} folds")]
    TooFewHypotheses { m: usize, folds: usize },

    #[error("weight at index {index} is negative or not finite: {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("block weight at index {index} is not positive: {value}")]
    NonpositiveWeight { index: usize, value: f64 },

    #[error("{value} is outside the domain [0, 1]")]
    OutOfDomain { value: f64 },

    #[error("linear program dimensions are inconsistent: {0}")]
    DimensionMismatch(String),

    #[error("simplex failed: {0}")]
    NumericalFailure(String),

    #[error("requested {requested} bins but the covariate only has {distinct} distinct values")]
    TooManyBins { requested: usize, distinct: usize },

    #[error("invalid level: {0}")]
    InvalidLevel(f64),

    #[error("tau' = {tau_prime} must lie in [tau, 1) with tau = {tau}")]
    InvalidTauPrime { tau: f64, tau_prime: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
}

pub type Result<T> = std::result::Result<T, IhwError>;

pub(crate) fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(IhwError::InvalidLevel(alpha))
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(IhwError::LengthMismatch { expected, actual })
    }
}
