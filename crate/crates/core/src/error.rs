use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters: lattice size, error rates, unknown ids.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input to an otherwise valid routine (length mismatch etc).
    #[error("input error: {0}")]
    Input(String),

    /// A decoder or matching invariant was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    /// A nonlinear fit failed to converge or produced unusable parameters.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
