use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },
    #[error("reaction function not admissible: {0}")]
    Shape(String),
    #[error("change of variables not valid: min F' = {min_slope} must exceed -1")]
    Validity { min_slope: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("Newton iteration failed to converge in cell {cell}")]
    StepFailure { cell: usize },
    #[error("time step underflow at t = {t} (dt = {dt})")]
    Underflow { t: f64, dt: f64 },
    #[error("integration failed, partial artifacts written: {0}")]
    Integration(String),
    #[error("cell partition error: {0}")]
    Partition(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("config line {line}: key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
