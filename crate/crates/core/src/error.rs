use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match: {0}")]
    GridMismatch(&'static str),

    #[error("target domain [0, {target}] exceeds source domain [0, {available}]")]
    DomainExceeded { target: f64, available: f64 },

    #[error("index {index} out of range for grid with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("division rate must be nonnegative, found {value} at node {index}")]
    NegativeRate { index: usize, value: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("series did not converge after {terms} terms")]
    SeriesDivergence { terms: usize },

    #[error("singular linear system")]
    Singular,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Errors caused by the caller's input rather than by a solver.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_) | Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io { .. } | Error::DomainExceeded { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
