use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The exact methods are exponential in the worst case; callers hitting this
    /// should fall back to the Monte-Carlo estimator.
    #[error("{what} exceeds the exact-computation limit ({limit}); use the Monte-Carlo estimator instead")]
    Capacity { what: String, limit: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
