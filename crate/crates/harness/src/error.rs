//! Harness-level error type: wraps library errors and adds file, parse, and
//! configuration contexts from the I/O layer.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// An estimator or analysis call failed.
    #[error(transparent)]
    Core(#[from] freqest_core::Error),

    /// A data file could not be parsed; `row` is 1-based and counts every
    /// line including any header.
    #[error("{}:{row}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    /// Filesystem failure with the path that triggered it.
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A scenario or config file is structurally invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested preset does not exist.
    #[error("unknown preset `{0}`; run `freqest list-presets` for the catalog")]
    UnknownPreset(String),

    /// A required input was not supplied on the command line.
    #[error("{0}")]
    MissingInput(String),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, row: usize, reason: impl Into<String>) -> Self {
        HarnessError::Parse { path: path.into(), row, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
