//! Experiment plumbing for the Hyper-CP simulator: TOML configuration,
//! parallel parameter sweeps, CSV/JSON result tables, event traces and the
//! reproduction report. The models themselves live in `hypercp-core`.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod output;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Output(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}
