use std::path::PathBuf;

use thiserror::Error;

use crate::graph::ValidationIssue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationIssue),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dense oracle refused: {n} nodes exceeds cap of {cap}; use bound-only mode")]
    TooLargeForDense { n: usize, cap: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 1 validation / argument failure, 2 convergence failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged { .. } => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}
