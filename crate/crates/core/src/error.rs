use thiserror::Error;

use crate::solver::LinearSystemStats;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular pressure system: {0}")]
    Nullspace(String),
    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        stats: LinearSystemStats,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
