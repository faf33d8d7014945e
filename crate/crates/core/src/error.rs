use thiserror::Error;

/// Errors produced by dataset handling, model training and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("unparseable cell at data row {row}, column `{column}`: {value:?}")]
    Unparseable {
        row: usize,
        column: String,
        value: String,
    },

    #[error("missing value at data row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("feature index {index} out of range for {n_features} features")]
    IndexOutOfRange { index: usize, n_features: usize },

    #[error("feature subset is empty")]
    EmptySubset,

    #[error("invalid feature subset: {0}")]
    InvalidSubset(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("column mismatch: {0}")]
    ColumnMismatch(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("exhaustive search over {requested} features exceeds the cap of {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
