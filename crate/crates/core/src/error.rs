use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-binary concept entry {value} at row {row}, column {col}")]
    NonBinaryConcept {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("unknown header: {0}")]
    UnknownHeader(String),

    #[error("duplicate concept name `{0}`")]
    DuplicateName(String),

    #[error("ragged dimensions: concept `{name}` has length {found}, expected {expected}")]
    RaggedDimension {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("zero vector under cosine distance")]
    ZeroVector,

    #[error("concept `{0}` is never active")]
    InactiveConcept(String),

    #[error("infeasible correlation structure: covariance is not positive semi-definite (offending pairs: {0})")]
    InfeasibleCorrelation(String),

    #[error("co-occurrence minimum is zero at entry ({row}, {col}); theta must be positive")]
    ZeroTheta { row: usize, col: usize },

    #[error("non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("k ≥ 2 required (got k = {0})")]
    TooFewConcepts(usize),

    #[error("index {index} out of range for {len} concepts")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Whether the error stems from bad input (parameters or files) rather
    /// than from a failure while computing.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Divergence { .. } | Error::Io { .. })
    }
}
