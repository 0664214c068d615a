//! Library side of the `resil` command-line tool.

use std::path::Path;

use thiserror::Error;

pub mod commands;
pub mod config;

pub use commands::{cmd_assess, cmd_simulate, cmd_size, cmd_stats, write_atomic};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or input data.
    #[error("{0}")]
    Invalid(String),
    #[error("no candidate design survives the outage window")]
    Infeasible,
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Infeasible => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Worker cap from `RESIL_THREADS`; `None` when unset.
pub fn thread_cap(var: Option<&str>) -> Result<Option<usize>, CliError> {
    match var {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Invalid(format!(
                "RESIL_THREADS: expected a positive integer, got {v:?}"
            ))),
        },
    }
}
