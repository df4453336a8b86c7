use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        /// 1-based line number in the file (the header is line 1).
        row: usize,
        /// 1-based column number.
        column: usize,
        message: String,
    },
    #[error("column {column} has standard deviation {std_dev:e}; cannot standardize")]
    ConstantColumn { column: usize, std_dev: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] linmtl_core::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
