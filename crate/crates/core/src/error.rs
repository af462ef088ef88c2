use std::path::PathBuf;

use faer::c64;

pub type Result<T, E = DmdError> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or unreadable input data.
    Data,
    /// Invalid parameters for the requested computation.
    Config,
    /// A factorization failed or the problem is numerically degenerate.
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum DmdError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at (row {row}, column {col})")]
    NonFinite { row: usize, col: usize },

    #[error("too few snapshots: need at least {required}, got {got}")]
    TooFewSnapshots { required: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reduced dimension r = {r} violates r < m/2 (m = {m} snapshots)")]
    ReducedDimensionTooLarge { r: usize, m: usize },

    #[error("truncation level k = {k} outside 1..={r}")]
    InvalidTruncation { k: usize, r: usize },

    #[error("snapshot matrix is numerically rank-deficient: achieved rank {achieved} < r = {requested}")]
    RankDeficient { requested: usize, achieved: usize },

    #[error("V11 block is numerically zero for k = {k}")]
    SingularV11 { k: usize },

    #[error("complex eigenvalue {0} has no conjugate partner")]
    UnpairedEigenvalue(c64),

    #[error("zero eigenvalue has no frequency")]
    ZeroEigenvalue,

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("inner product is zero; phase alignment undefined")]
    ZeroInnerProduct,

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<DmdError>,
    },
}

impl DmdError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DmdError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            DmdError::Io { .. }
            | DmdError::MalformedHeader(_)
            | DmdError::Parse { .. }
            | DmdError::DimensionMismatch(_)
            | DmdError::NonFinite { .. }
            | DmdError::TooFewSnapshots { .. }
            | DmdError::UnpairedEigenvalue(_) => ErrorClass::Data,
            DmdError::InvalidParameter(_)
            | DmdError::ReducedDimensionTooLarge { .. }
            | DmdError::InvalidTruncation { .. } => ErrorClass::Config,
            DmdError::RankDeficient { .. }
            | DmdError::SingularV11 { .. }
            | DmdError::ZeroEigenvalue
            | DmdError::NoConvergence(_)
            | DmdError::TooFewSamples { .. }
            | DmdError::ZeroInnerProduct => ErrorClass::Numerical,
            DmdError::Trial { source, .. } => source.class(),
        }
    }
}
