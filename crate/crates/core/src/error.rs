use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BdkError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "point of modulus {modulus} lies outside the evaluation radius {radius}; \
         truncated tails decay like r^(N+1)/(1-r) and are uncontrolled beyond it"
    )]
    Domain { modulus: f64, radius: f64 },

    #[error("target {0} is the image of the origin; the counting function is singular there")]
    SingularTarget(Complex64),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, BdkError>;

pub(crate) fn invalid(msg: impl Into<String>) -> BdkError {
    BdkError::InvalidInput(msg.into())
}
