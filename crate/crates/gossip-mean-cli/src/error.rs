//! CLI error classification and exit codes.

use thiserror::Error;

/// Exit status 2 for configuration problems, 1 for computational or IO
/// failures, matching the convention that usage errors are distinct from
/// runtime errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("computation: {0}")]
    Compute(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}
