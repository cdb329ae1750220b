use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the set an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A demand curve failed construction or regularity validation.
    #[error("invalid demand model: {0}")]
    InvalidModel(String),

    /// A policy asked the simulator for something it may not do.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("regret is undefined when the deterministic benchmark value is zero")]
    UndefinedRegret,

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
