//! `vulnrank` command-line tool: configuration, file formats, the model
//! container and the subcommands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod io;

use thiserror::Error;
use vulnrank_eval::EvalError;
use vulnrank_neural::NeuralError;

pub use commands::run;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input: {0}")]
    Input(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Neural(NeuralError::NonFinite(_)) => CliError::Numeric(e.to_string()),
            EvalError::TooFewSamples { .. } | EvalError::ProjectTooSmall { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::NonFinite(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
