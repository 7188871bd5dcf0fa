use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BscError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("at t={t}: {source}")]
    AtStep {
        t: usize,
        #[source]
        source: Box<BscError>,
    },
}

impl BscError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        BscError::InvalidArgument(msg.into())
    }

    pub(crate) fn at_step(t: usize, source: BscError) -> Self {
        BscError::AtStep {
            t,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, BscError>;
