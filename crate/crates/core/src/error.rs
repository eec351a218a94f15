use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point outside the domain of {factor}: {detail}")]
    Domain { factor: String, detail: String },

    #[error("tangent vector lies on the zero section")]
    ZeroSection,

    #[error("rank-one update is singular (denominator {0:e})")]
    SingularUpdate(f64),

    #[error("matrix is singular or not positive definite (pivot {0:e})")]
    Singular(f64),

    #[error("geodesic left the domain at s = {s}")]
    BoundaryExit { s: f64, last_x: Vec<f64>, last_u: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(factor: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Domain {
            factor: factor.into(),
            detail: detail.into(),
        }
    }
}
