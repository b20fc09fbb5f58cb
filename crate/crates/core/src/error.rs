//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, TriageError>;

/// Errors raised by corpus handling, feature extraction, model fitting,
/// and evaluation.
#[derive(Debug, Error)]
pub enum TriageError {
    #[error("missing column '{name}': schema names a header not present in the file")]
    MissingColumn { name: String },

    #[error("row {row}: {detail}")]
    MalformedRow { row: usize, detail: String },

    #[error("no usable records remain after filtering for task {task}")]
    NoUsableRecords { task: String },

    #[error("bad fold count k={k} for {n} records")]
    BadK { k: usize, n: usize },

    #[error("vocabulary is empty after min_df={min_df} filtering")]
    EmptyVocabulary { min_df: usize },

    #[error("selection names unknown column '{name}'")]
    SelectionUnknownColumn { name: String },

    #[error("multinomial naive bayes requires non-negative features: column '{column}' has {value} at row {row}")]
    NegativeFeatureForMultinomialNb {
        row: usize,
        column: String,
        value: f64,
    },

    #[error("degenerate training data: {detail}")]
    DegenerateData { detail: String },

    #[error("bad hyperparameter '{name}' for {algorithm}: {detail}")]
    BadHyperparameter {
        algorithm: String,
        name: String,
        detail: String,
    },

    #[error("feature schema mismatch: {detail}")]
    SchemaMismatch { detail: String },

    #[error("length mismatch: {left} true labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("model file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("unknown tagger '{name}': only bundled taggers can be restored from a model file")]
    UnknownTagger { name: String },

    #[error("issue document is missing required field '{name}'")]
    MissingRequiredField { name: String },

    #[error("non-finite value in feature matrix at ({row}, {col})")]
    NonFiniteValue { row: usize, col: usize },

    #[error("fold {fold}: {source}")]
    InFold {
        fold: usize,
        #[source]
        source: Box<TriageError>,
    },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl TriageError {
    /// Wraps an error with the index of the cross-validation fold it
    /// occurred in.
    pub fn in_fold(self, fold: usize) -> Self {
        TriageError::InFold {
            fold,
            source: Box::new(self),
        }
    }
}
