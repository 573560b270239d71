use std::path::PathBuf;

use thiserror::Error;

use crate::rsvd::QbState;

/// Errors raised by the factorization, filtering and ingestion routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("rank-deficient input: column {column} has diagonal factor {value:e} below threshold {threshold:e}")]
    RankDeficient {
        column: usize,
        value: f64,
        threshold: f64,
    },

    #[error("near-singular Gram matrix: eigenvalue {eigenvalue:e} at position {index} is below floor {floor:e}")]
    NearSingular {
        index: usize,
        eigenvalue: f64,
        floor: f64,
    },

    #[error("termination criterion not met before rank {rank} (cap {cap})")]
    Exhausted { rank: usize, cap: usize, state: Box<QbState> },

    #[error("invalid sparse structure: {0}")]
    InvalidSparse(String),

    #[error("index ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that come from the numerics rather than from
    /// malformed input (bad files, arguments or dimensions).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::RankDeficient { .. }
                | Error::NearSingular { .. }
                | Error::Exhausted { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
