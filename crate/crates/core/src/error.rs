use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed delimited input: {0}")]
    Csv(#[from] csv::Error),

    #[error("header mismatch: missing columns {missing:?}, unexpected columns {extra:?}")]
    HeaderMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("table has a header but no data rows")]
    EmptyTable,

    #[error("expected {expected} data rows, found {found}")]
    UnexpectedRowCount { expected: usize, found: usize },

    #[error("column not found: {0}")]
    ColumnNotFound(String),

    #[error("row {row}: grade {value:?} is not an integer")]
    NonIntegerGrade { row: usize, value: String },

    #[error("cannot fit encoding statistics on an empty row set")]
    EmptyFitSet,

    #[error("row {row}, column {column:?}: {value:?} is not a finite number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: target value {value:?} is not a known class")]
    UnknownTargetClass { row: usize, value: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("fraction {0} is outside the allowed range")]
    InvalidFraction(f64),

    #[error("stratification impossible: class {class} would lose all of its training samples")]
    StratificationImpossible { class: usize },

    #[error("cannot split {rows} rows across {clients} clients")]
    TooManyClients { clients: usize, rows: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("nothing to aggregate")]
    EmptyInput,

    #[error("label flipping needs at least two classes")]
    SingleClass,

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("metric undefined on an empty label vector")]
    Empty,

    #[error("AUC undefined: no (positive, negative) pairs in the ground truth")]
    NoPositivePairs,

    #[error("config parse error in {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::ConfigParse { .. }
            | Error::InvalidSchema(_)
            | Error::InvalidFraction(_) => 1,
            Error::FileNotFound(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::HeaderMismatch { .. }
            | Error::RaggedRow { .. }
            | Error::EmptyTable
            | Error::UnexpectedRowCount { .. }
            | Error::ColumnNotFound(_)
            | Error::NonIntegerGrade { .. }
            | Error::EmptyFitSet
            | Error::NonNumericCell { .. }
            | Error::UnknownTargetClass { .. }
            | Error::StratificationImpossible { .. }
            | Error::TooManyClients { .. }
            | Error::SingleClass
            | Error::NoPositivePairs => 2,
            Error::ShapeMismatch(_)
            | Error::EmptyInput
            | Error::LengthMismatch { .. }
            | Error::Empty
            | Error::Json(_)
            | Error::Invariant(_) => 3,
        }
    }
}
