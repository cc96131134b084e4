use thiserror::Error;

/// Broad failure classes, used by the command-line driver to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Solver,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Solver => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("no labeled points")]
    NoLabels,

    #[error("coincident labels: nodes {0} and {1} share a location")]
    CoincidentLabels(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("k = {k} is out of range for {n} nodes")]
    InvalidK { k: usize, n: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("connected components without labels: {components:?} (sizes {sizes:?})")]
    UnlabeledComponents {
        components: Vec<usize>,
        sizes: Vec<usize>,
    },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("empty evaluation region: {0}")]
    EmptyRegion(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::InvalidK { .. } => ErrorCategory::Config,
            Error::NoLabels
            | Error::CoincidentLabels(..)
            | Error::DimensionMismatch { .. }
            | Error::Data(_)
            | Error::EmptyRegion(_)
            | Error::Io { .. } => ErrorCategory::Data,
            Error::UnlabeledComponents { .. } | Error::NotConverged { .. } | Error::Solver(_) => {
                ErrorCategory::Solver
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
