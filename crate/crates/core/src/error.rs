use thiserror::Error;

/// Errors produced anywhere in the structure-learning toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph contains a directed cycle")]
    Cycle,

    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("graphs have different sizes ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("edge {0} -> {1} is not present")]
    EdgeAbsent(usize, usize),

    #[error("edge {0} -> {1} is not covered")]
    NotCovered(usize, usize),

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("class has no consistent extension")]
    NoExtension,

    #[error("invalid variable specification: {0}")]
    Spec(String),

    #[error("invalid query: {0}")]
    Query(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("zero-probability conditioning event")]
    ZeroProbability,

    #[error("selection acceptance probability estimated at {estimate:e} after {draws} draws")]
    SelectionAbort { draws: u64, estimate: f64 },

    #[error("not included: {0}")]
    NotIncluded(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
