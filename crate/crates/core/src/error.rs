use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("triple source contains no edges")]
    EmptyGraph,

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("edge ({subj}, {label}, {obj}) is not in the data graph")]
    UnknownEdge {
        subj: String,
        label: String,
        obj: String,
    },

    #[error("invalid tuple: {0}")]
    InvalidTuple(String),

    #[error("query tuples have mixed arity (expected {expected}, found {found})")]
    ArityMismatch { expected: usize, found: usize },

    #[error("query entities are not connected within distance {d}")]
    DisconnectedTuple { d: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("maximal query graph has {0} edges; at most 64 are supported")]
    QueryGraphTooLarge(usize),

    #[error("intermediate result exceeded {limit} rows")]
    RowLimit { limit: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
