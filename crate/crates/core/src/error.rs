use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("subsystem `{label}` has dimension {dim}; every subsystem needs at least 2 levels")]
    InvalidDimension { label: String, dim: usize },

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("index ({row}, {col}) outside a space of dimension {dim}")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },

    #[error("time {t} outside [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step {0} has no cavity subspace model (only steps 1, 2, 4 and 5 do)")]
    NoSubspaceModel(u8),

    #[error("unknown decoherence channel `{0}`")]
    UnknownChannel(String),

    #[error(
        "norm drifted by {drift:.3e} at t = {t:.6} with dt = {dt:.3e}; \
         reduce the step size"
    )]
    NormDrift { drift: f64, t: f64, dt: f64 },

    #[error("trace drifted by {drift:.3e} at t = {t:.6} with dt = {dt:.3e}")]
    TraceDrift { drift: f64, t: f64, dt: f64 },

    #[error("density matrix lost positivity at t = {t:.6}: minimum eigenvalue {min_eigenvalue:.3e}")]
    NegativeEigenvalue { min_eigenvalue: f64, t: f64 },

    #[error("no convergence after {halvings} halvings (last change {last_change:.3e}, target {target:.1e})")]
    NotConverged { halvings: u32, last_change: f64, target: f64 },

    #[error("{context}: {source}")]
    Step {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Wraps an error with the protocol step or sweep point it came from.
    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::Step { context: context.into(), source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
