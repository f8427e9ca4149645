use std::path::PathBuf;

/// Errors produced by the feature-selection engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("non-numeric feature value `{value}` at row {row}, column `{column}`")]
    NonNumericFeature {
        row: usize,
        column: String,
        value: String,
    },

    #[error("label column `{0}` not found in header")]
    LabelColumnMissing(String),

    #[error("label column must contain exactly two distinct values, found {0}")]
    NonBinaryLabels(usize),

    #[error("dataset invariant violated: {0}")]
    InvalidDataset(String),

    #[error("class too small to stratify: {0}")]
    StratificationFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature subset is empty")]
    EmptySubset,

    #[error("k_neighbors ({k}) exceeds available training rows ({train})")]
    TooFewTrainingRows { k: usize, train: usize },

    #[error("redundant toggle: feature {feature} is already {}", if *.on { "active" } else { "inactive" })]
    RedundantToggle { feature: usize, on: bool },

    #[error("confusion counts are all zero")]
    EmptyConfusion,

    #[error("mutual information requires integer-valued (discretized) columns; column {0} is not")]
    NonDiscreteColumn(usize),

    #[error("invalid config: {field}: {message}")]
    Config { field: String, message: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
