//! Error type shared across the toolkit.

use thiserror::Error;

/// Everything that can go wrong while loading data, building windows,
/// fitting models, or running a benchmark.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad field values, unknown names, malformed
    /// config files, inconsistent hyper-parameter requests.
    #[error("config error: {0}")]
    Config(String),

    /// Data problems: unreadable files, malformed rows, shape mismatches,
    /// missing values where none are allowed.
    #[error("data error: {0}")]
    Data(String),

    /// Numerical failures: degenerate denominators, non-finite values
    /// produced where a finite result is required.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: config -> 1, data/io -> 2, numerical -> 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Data(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
