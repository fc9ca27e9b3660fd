//! Command-line experiments, configuration and report formats on top of
//! `caplight-core`.

pub mod commands;
pub mod config;
pub mod output;
pub mod region_json;

use caplight_core::Error;

/// Exit code 2: the input was rejected before any contract was checked.
pub const EXIT_INVALID: u8 = 2;
/// Exit code 1: the run finished but a contract failed.
pub const EXIT_FAILED: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::OffSphere { .. }
            | Error::InvalidCapRadius { .. }
            | Error::RegionDimension { .. }
            | Error::UnsupportedDimension(_)
            | Error::InvalidContext { .. }
            | Error::NegativeTime(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}
