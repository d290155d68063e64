//! Configuration loading, command dispatch and output for the `engine` binary.

pub mod commands;
pub mod config;
pub mod expr;
pub mod render;

pub use commands::{run, Command, Options, Outcome, Report, Session};
pub use config::{load_config, parse_config, Config};
pub use render::{emit, Format};

/// Failures surfaced by the driver. Configuration and argument problems map
/// to exit code 2, computation errors to 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}: {message}")]
    Config { origin: String, message: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{command}: {error}")]
    Compute {
        command: String,
        error: toric_ifn::Error,
    },
}

impl CliError {
    pub fn compute(command: &str, error: toric_ifn::Error) -> Self {
        CliError::Compute {
            command: command.to_string(),
            error,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Argument(_) => 2,
            CliError::Compute { .. } => 3,
        }
    }
}
