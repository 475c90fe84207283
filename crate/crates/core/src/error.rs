use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("wall radius non-positive: a - b = {0} must be > 0")]
    NonPositiveRadius(f64),

    #[error("index {index} out of range for basis of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("norm drift {drift:e} exceeds limit {limit:e}")]
    NormDrift { drift: f64, limit: f64 },

    #[error(
        "time sampling too coarse: requested omega {requested} exceeds max safe omega {max_safe}"
    )]
    Aliasing { requested: f64, max_safe: f64 },

    #[error("spectrum does not cover harmonic {order} (omega = {omega}, max grid omega = {max})")]
    Coverage { order: usize, omega: f64, max: f64 },

    #[error("inconsistent observable: imaginary part {0:e}")]
    Consistency(f64),

    #[error("failed to invert tau(t) at tau = {0:e}")]
    TauInversion(f64),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
