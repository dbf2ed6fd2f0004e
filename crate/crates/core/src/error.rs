//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected:?}, got {got:?}")]
    GridMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Fourier multipliers are undefined at the zero mode")]
    ZeroMode,

    #[error("magnetic field divergence {norm:.3e} exceeds tolerance {tol:.3e}")]
    DivergenceViolation { norm: f64, tol: f64 },

    #[error("solution blew up at t = {t:.6}: {detail}")]
    BlowUp { t: f64, detail: String },

    #[error("slope fit rejected: {0}")]
    FitRejected(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
