//! Error type shared by every module in the crate.

use thiserror::Error;

/// Axis of a matrix, used to point at the offending row or column in
/// rank-deficiency diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Column => write!(f, "column"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or structural argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two operands that must agree in shape do not.
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    /// A row or column has too few observed entries to pin down a rank-r fit
    /// without regularization.
    #[error("{axis} {index} has {observed} observed entries but a rank-{required} fit needs at least {required}; raise the ridge or densify the sample")]
    StarvedIndex {
        axis: Axis,
        index: usize,
        observed: usize,
        required: usize,
    },

    /// A matrix that must have full numerical rank for the operation does not.
    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    /// A column's observation mask leaves nothing to fit against.
    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    /// Malformed text input (CSV or config), with a 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Underlying I/O failure while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
