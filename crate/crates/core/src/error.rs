use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    Alphabet(String),

    #[error("invalid sequence `{id}`: {reason}")]
    Sequence { id: String, reason: String },

    #[error("overlapping episodes for group `{group}` on {date}")]
    OverlappingEpisodes { group: String, date: String },

    #[error("state `{0}` has no entry in the state mapping")]
    UnmappedState(String),

    #[error("dataset is empty{0}")]
    EmptyDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("data matrix is already centered")]
    AlreadyCentered,

    #[error("data matrix must be centered before decomposition")]
    NotCentered,

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("singular value decomposition failed: {0}")]
    Numerical(String),

    #[error("cluster counts differ: truth has {truth}, prediction has {predicted}")]
    ClusterCountMismatch { truth: usize, predicted: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
