use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    /// Inconsistent or unusable configuration (empty vocabulary, mismatched
    /// artifacts, empty intersections).
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid argument to an operation (dimension mismatch, out-of-range id).
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("insufficient coverage: {evaluated} pairs evaluated, {skipped} skipped")]
    Coverage { evaluated: usize, skipped: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }
}
