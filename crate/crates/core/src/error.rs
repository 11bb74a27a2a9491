use std::path::PathBuf;

/// Errors produced by the numerical pipeline and its file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),

    #[error("root solver did not converge for root {index} in bracket ({lo}, {hi}); best residual {residual:e}")]
    SolverFailure {
        index: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol:e}: estimate {estimate}, error {error:e}")]
    QuadratureFailure {
        a: f64,
        b: f64,
        tol: f64,
        estimate: f64,
        error: f64,
    },

    #[error("cache {path} does not match the requested configuration: {reason}")]
    CacheInvalid { path: PathBuf, reason: String },

    #[error("parse error in {path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical methods themselves (as opposed to
    /// bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure { .. } | Error::QuadratureFailure { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
