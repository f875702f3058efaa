use thiserror::Error;

/// Errors surfaced by the simulator and the analytic BER machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid seed: chaotic map state {state} is degenerate (fixed point or collapsed orbit)")]
    InvalidSeed { state: f64 },

    #[error("invalid Walsh order {0}: must be a power of two >= 2")]
    InvalidOrder(usize),

    #[error("invalid user index {user} (valid range 1..={users})")]
    InvalidUser { user: usize, users: usize },

    #[error("framing error: expected {expected} samples, got {actual}")]
    Framing { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("MGF diverges at s = {s} (requires s < 1/b = {limit})")]
    Divergence { s: f64, limit: f64 },

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
