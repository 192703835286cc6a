use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants are split by how a caller should react: [`Error::Singular`] marks
/// input that is well-formed but where an energy is undefined (duplicate or
/// antipodal points), everything else is a validation or I/O failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("row {row}: norm {norm} deviates from 1 by more than {tolerance}")]
    NotUnitNorm {
        row: usize,
        norm: f64,
        tolerance: f64,
    },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("kernel split undefined: points {i} and {j} are antipodal (inner product {inner})")]
    AntipodalPair { i: usize, j: usize, inner: f64 },

    #[error("quadrature did not converge: estimated error {estimate:e} above target {target:e}")]
    Quadrature { estimate: f64, target: f64 },

    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
