//! Command-line driver: generate planted fields, decompose snapshot files,
//! sweep the T-TLS truncation level and run Monte Carlo noise studies.
//!
//! Exit codes are `0` on success, `2` for configuration errors, `3` for data
//! errors and `4` for numerical failures. On failure a one-line JSON object
//! describing the error is written to stderr.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

pub use args::{Cli, Command, CommandKind, RunArgs};
pub use config::RunConfig;
pub use error::{CliError, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL};

/// Resolves the configuration and runs the command.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (kind, args) = cli.command.split();
    let cfg = RunConfig::resolve(kind, args)?;
    commands::execute(&cfg)
}
