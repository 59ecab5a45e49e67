use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid genome: {0}")]
    InvalidGenome(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite network input at index {0}")]
    NonFiniteInput(usize),

    #[error("network arity mismatch: task needs {expected_in} inputs and {expected_out} outputs, network has {found_in} and {found_out}")]
    Arity {
        expected_in: usize,
        expected_out: usize,
        found_in: usize,
        found_out: usize,
    },

    #[error("population member {0} has not been evaluated")]
    Unevaluated(usize),

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
