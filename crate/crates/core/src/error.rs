use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {what} needs dimension {requested}, limit is {limit}")]
    Capacity { what: &'static str, requested: usize, limit: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Some layer coefficient sits on the unit circle, `|b_k| = 1`.
    #[error("singular skeleton point: |b_{k}| = 1 (b_{k} = {value})")]
    Singular { k: usize, value: f64 },

    /// The Laurent polynomial has (numerically) a zero on the unit circle.
    #[error("gapless: {0}")]
    Gapless(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
