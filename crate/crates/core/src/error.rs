use thiserror::Error;

/// Errors produced by solver construction, validation, and iteration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("nonfinite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("inertial schedule rejected: {condition}; admissible rho interval is (0, {rho_max})")]
    ScheduleViolation { condition: String, rho_max: f64 },

    #[error("step-size condition violated: {condition} (margin {margin:e})")]
    StepSizeViolation { condition: String, margin: f64 },

    #[error("power iteration did not converge in {iters} iterations (best estimate {best})")]
    PowerIterationStalled { iters: usize, best: f64 },

    #[error("linear map is not supported here: {0}")]
    UnsupportedOperator(String),

    #[error("coordinate sampler rejected: {0}")]
    InvalidSampler(String),

    #[error("graph violates the connectivity assumption: {0}")]
    DisconnectedGraph(String),

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
