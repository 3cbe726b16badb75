//! Scenario-driven front end for the uavnet core: TOML configs, CSV
//! artifacts, parallel Monte-Carlo execution and the verification suite.

pub mod acceptance;
pub mod config;
pub mod csvio;
pub mod manifest;
pub mod parallel;
pub mod runners;

use std::fmt;

/// Process-level error with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit 1). The message names the
    /// offending key.
    Validation(String),
    /// Runtime or numeric failure (exit 2).
    Runtime(String),
    /// Verification ran but some criterion missed its tolerance (exit 3).
    ToleranceNotMet(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::ToleranceNotMet(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::ToleranceNotMet(m) => write!(f, "tolerance not met: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io: {e}"))
    }
}
