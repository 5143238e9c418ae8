use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure classes of the public
/// operations: bad caller input, a model that violates a structural guarantee
/// it was supposed to have, and I/O or container-format problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model violation: {0}")]
    Model(String),

    #[error("hyperedge decomposition failed: {0}")]
    Decomposition(String),

    #[error("dataset format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub fn decomposition(msg: impl Into<String>) -> Self {
        Error::Decomposition(msg.into())
    }
}
