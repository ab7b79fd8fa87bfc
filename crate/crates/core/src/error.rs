use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge (achieved error estimate {achieved:e}, requested {requested:e})")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("trajectory diverged at t = {time}: state norm {norm:e} exceeds guard {guard:e}")]
    Divergence { time: f64, norm: f64, guard: f64 },

    #[error("control horizon {horizon} is shorter than the effective support end {required}")]
    HorizonTooShort { horizon: f64, required: f64 },

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("unknown built-in system '{0}'")]
    UnknownSystem(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
