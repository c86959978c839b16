//! File formats, CSV input and the command line for `hybridpp-core`.
//!
//! The pipeline reads a CSV, fits a piecewise-polynomial density per column,
//! writes a hybrid program, answers queries against it, converts it to a
//! discrete program and learns rules for a target predicate.

pub mod cli;
pub mod data;
pub mod files;
pub mod learn;

use hybridpp_core::Error as CoreError;

/// A failed command, classified by the exit code it produces.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Refused(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Refused(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ChoiceSpaceTooLarge { .. } | CoreError::InfiniteGrounding(_) => CliError::Refused(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
