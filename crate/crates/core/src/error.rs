use std::path::PathBuf;

use thiserror::Error;

use crate::detection::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Grids, windows or scenario settings that cannot produce a valid run.
    #[error("configuration error: {0}")]
    Config(String),

    /// A physical constraint on the comb or probe window was violated.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The data cannot support the requested analysis.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// The least-squares fit did not converge; the best iterate is kept.
    #[error("fit did not converge: {message}")]
    Fit {
        message: String,
        best: Box<FitResult>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// Wraps any error with the config key that produced it.
    #[error("{key}: {source}")]
    AtConfig {
        key: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at(self, key: impl Into<String>) -> Self {
        Error::AtConfig {
            key: key.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 for configuration-class failures, 2 for analysis failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Analysis(_) | Error::Fit { .. } => 2,
            Error::AtConfig { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
