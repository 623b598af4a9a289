use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {index} is zero and cannot be normalized")]
    ZeroColumn { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    SvdFailed { rows: usize, cols: usize },

    #[error("symmetric eigendecomposition failed to converge on a {0}x{0} matrix")]
    EigenFailed(usize),

    #[error("linear system is singular")]
    Singular,

    #[error("target is not reachable from the dictionary: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    Infeasible { residual: f64, tolerance: f64 },

    #[error("solver failed on point {index}: {source}")]
    PointSolve {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("affinity matrix is identically zero")]
    ZeroAffinity,

    #[error("class {class} has {available} samples, {requested} requested")]
    ClassTooSmall {
        class: usize,
        available: usize,
        requested: usize,
    },

    #[error("wrong magic number in {path}: expected {expected:#010x}, found {found:#010x}")]
    WrongMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("truncated IDX file {path}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("ragged CSV at row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric CSV cell at ({row}, {col}): {value:?}")]
    NonNumeric { row: usize, col: usize, value: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
