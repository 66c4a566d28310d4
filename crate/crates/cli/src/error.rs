use std::path::PathBuf;

use lagcoh_core::MeasureId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lagcoh_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("{path}: byte {offset}: {message}")]
    Binary { path: PathBuf, offset: u64, message: String },
    #[error("{path}: {message}")]
    Header { path: PathBuf, message: String },
    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("bin {bin}, {measure}: {source}")]
    Measure {
        bin: usize,
        measure: MeasureId,
        #[source]
        source: lagcoh_core::Error,
    },
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
