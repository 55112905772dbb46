//! Batch front end for `qgt-core`: parameter/size sweeps to CSV with a run
//! manifest, finite-size fits with plot scripts, the exponent calculator,
//! Berry-phase runs and gap tables.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berry;
pub mod exponents;
pub mod fit;
pub mod gaps;
pub mod grid;
pub mod manifest;
pub mod settings;
pub mod sweep;
pub mod table;

use std::path::PathBuf;

use thiserror::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    PartialFailure = 2,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] qgt_core::Error),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Schema { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Every hard error exits with 1; partial failures are not errors.
    pub fn exit_status(&self) -> ExitStatus {
        ExitStatus::Usage
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Version string written into manifests.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
