use thiserror::Error;

use crate::theta::ThetaResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The theta solver hit its iteration cap. The best iterate is kept so
    /// callers can still inspect the certificate and the remaining gap.
    #[error("theta solver did not converge (gap {:.3e} after {} iterations)", .0.gap, .0.iterations)]
    NotConverged(Box<ThetaResult>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) | Error::NotConverged(_) => 2,
            Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
