use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window scale {0} out of range (0..=14)")]
    ScaleOutOfRange(u8),

    #[error("invalid RWNDQ parameters: {0}")]
    InvalidParams(String),

    #[error("invalid fluid configuration: {0}")]
    InvalidConfig(String),

    #[error("queue never settled inside the band")]
    NotConverged,

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),

    #[error("empty input")]
    EmptyInput,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid value for `{field}`: {msg}")]
    Validation { field: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
