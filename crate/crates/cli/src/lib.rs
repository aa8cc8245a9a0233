//! Command-line front end: scenario files, validation, runs, sweeps and the
//! acceptance report.
//!
//! The `iandi` binary is a thin wrapper over [`cli::main_with_args`], which is
//! also what the integration tests drive.

pub mod cli;
pub mod criteria;
pub mod expr;
pub mod metrics;
pub mod params;
pub mod plot;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;

use std::path::{Path, PathBuf};

use iandi::design::DesignError;
use thiserror::Error;

pub use scenario::Scenario;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

/// Environment variable naming the artifact root when `--out` is absent.
pub const OUT_ENV: &str = "IANDI_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Design(DesignError),
    #[error("sweep value {parameter} = {value} is invalid: {source}")]
    SweepValue {
        parameter: String,
        value: f64,
        source: DesignError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for input that could not be read or understood, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Config(_) => 2,
            CliError::Design(_) | CliError::SweepValue { .. } | CliError::Io { .. } => 1,
        }
    }
}
