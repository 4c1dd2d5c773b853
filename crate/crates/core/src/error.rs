use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// The variants fall into three families that the command-line front end maps
/// onto distinct exit codes: bad parameters, bad data, and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data violates a structural invariant.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// An observation table failed validation; one message per violation.
    #[error("table validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// A computation could not produce a finite answer.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidData(_) => "invalid_data",
            Error::Validation(_) => "validation",
            Error::Numerical(_) => "numerical",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
