use std::path::PathBuf;

use thiserror::Error;

use crate::data::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // --- schema and ingestion ---
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("column `{0}` is missing from the input header")]
    MissingColumn(String),
    #[error("non-numeric cell at row {row}, column `{column}`: {value:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("file {0} contains no data rows")]
    EmptyFile(PathBuf),
    #[error("dataset is empty")]
    EmptyDataset,

    // --- splitting and shuffling ---
    #[error("class {0} has fewer than 2 records")]
    ClassTooSmall(Label),
    #[error("requested {requested} records of class {label} but only {available} exist")]
    CountExceedsClass {
        label: Label,
        requested: usize,
        available: usize,
    },
    #[error("label {0} does not occur in the dataset")]
    UnknownLabel(Label),

    // --- smote ---
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("neighbor search needs more than {neighbors} records, got {records}")]
    NotEnoughRecords { neighbors: usize, records: usize },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    // --- noise ---
    #[error("need at least 2 records to estimate a covariance, got {0}")]
    TooFewRecords(usize),
    #[error("covariance matrix is singular or not positive definite")]
    SingularCovariance,
    #[error("covariance matrix is not positive semi-definite (min eigenvalue {0:e})")]
    FactorizationFailure(f64),

    // --- anonymity ---
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` asks for zero bins")]
    ZeroBins(String),

    // --- evaluation ---
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("class {0} has fewer than 2 training records")]
    DegenerateClass(Label),
    #[error("linear SVM needs exactly two classes, found {0}")]
    NonBinaryLabels(usize),
    #[error("train and test schemas differ")]
    SchemaMismatch,

    // --- pipeline ---
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
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
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad inputs or configuration rather than a
    /// failure while a stage was running. The CLI maps these to exit code 1.
    /// Anything that goes wrong in the load stage (missing, unreadable or
    /// malformed files) counts as a validation error.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Stage { stage, source } => *stage == "load" || source.is_validation(),
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => false,
            Error::SingularCovariance
            | Error::FactorizationFailure(_)
            | Error::TooFewRecords(_)
            | Error::NotEnoughRecords { .. }
            | Error::DegenerateClass(_)
            | Error::EmptyTrainSet => false,
            _ => true,
        }
    }
}
