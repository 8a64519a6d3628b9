use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("{what} did not converge")]
    NoConvergence { what: String },

    #[error("result of {what} is below the representable range")]
    Underflow { what: String },

    #[error("grid inadequate: length {length} < required {required}")]
    GridInadequate { length: f64, required: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn no_convergence(what: impl Into<String>) -> Self {
        Error::NoConvergence { what: what.into() }
    }

    pub(crate) fn underflow(what: impl Into<String>) -> Self {
        Error::Underflow { what: what.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
