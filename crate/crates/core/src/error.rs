use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vertex index {index} out of range for n = {n}")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("window size {k} exceeds vertex count {n}")]
    WindowTooLarge { k: usize, n: usize },

    #[error("operation needs at least one edge")]
    NoEdges,

    #[error("exact enumeration needs {required:e} evaluations, budget is {budget:e}")]
    EnumerationBudget { required: f64, budget: f64 },

    #[error("state too large for exact oracle: {0}")]
    OracleSizeLimit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("motif is not a valid adjacency matrix: {0}")]
    InvalidMotif(String),

    #[error("density integrates to {total}, expected 1")]
    Normalization { total: f64 },

    #[error("evaluation outside the supported numeric range: {0}")]
    OutsideStableRange(String),

    #[error("goodness-of-fit test needs at least 2 cells after pooling, got {0}")]
    TooFewCells(usize),

    #[error("malformed snapshot at line {line}: {msg}")]
    MalformedSnapshot { line: usize, msg: String },

    #[error("snapshot checksum mismatch (file says {expected}, contents hash to {actual})")]
    ChecksumMismatch { expected: String, actual: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
