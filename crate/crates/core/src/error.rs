use thiserror::Error;

/// Errors raised across the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An invalid architecture, grid, schedule or problem pairing.
    #[error("configuration error: {0}")]
    Config(String),

    /// An arithmetic operation left its mathematical domain (e.g. division by zero).
    #[error("domain error: {0}")]
    Domain(String),

    /// The API was used incorrectly, e.g. a node from a foreign tape.
    #[error("usage error: {0}")]
    Usage(String),

    /// The requested quantity does not exist for this problem.
    #[error("capability error: {0}")]
    Capability(String),

    /// A solver produced a non-finite state.
    #[error("divergence at step {step}: {message}")]
    Divergence { step: usize, message: String },

    /// A metric whose denominator vanishes.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
