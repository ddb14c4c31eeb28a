//! Benchmark harness around the solver crate: data ingestion, problem
//! generators, the reference oracle, and experiment orchestration.

pub mod config;
pub mod data;
pub mod experiment;
pub mod reference;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("solver: {0}")]
    Solver(String),
}

impl CliError {
    /// Validation-class failures exit 1; usage errors too.
    pub fn exit_code(&self) -> i32 {
        1
    }
}
