use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("trajectory diverged at step {step} (|x| = {magnitude:e})")]
    Divergence { step: usize, magnitude: f64 },

    #[error("matrix is not stable: largest eigenvalue of the symmetric part is {max_eigenvalue}")]
    Unstable { max_eigenvalue: f64 },

    #[error("connected masses {i} and {j} are coincident")]
    CoincidentMasses { i: usize, j: usize },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("generation failed after {attempts} attempts")]
    RetryExhausted { attempts: usize },

    #[error("z = {z} lies inside the spectral support (edge at {edge})")]
    InsideSupport { z: f64, edge: f64 },

    #[error("solver did not converge after {iterations} iterations (last update {last_update:e})")]
    NotConverged { iterations: usize, last_update: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_)
            | Error::Infeasible(_)
            | Error::DimensionMismatch { .. }
            | Error::Parse { .. } => ErrorKind::Config,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Numeric,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
