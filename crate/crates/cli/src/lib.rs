//! Front end for the `reldft` experiments: flag/config resolution, the four
//! commands, and deterministic CSV/JSON reports.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Resolves the configuration, runs the command and writes the report.
pub fn execute(command: &config::Command) -> Result<(), CliError> {
    let cfg = config::RunConfig::resolve(command)?;
    let report = commands::run(&cfg)?;
    report::emit(&report, &cfg)
}
