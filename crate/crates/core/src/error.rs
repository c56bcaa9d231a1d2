use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("non-binary cell {value:?} at row {row}, column `{column}`")]
    NonBinaryCell { row: usize, column: String, value: String },

    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("rule mining produced no antecedents")]
    NoRules,

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid rule list: {0}")]
    InvalidRuleList(String),

    #[error("gini impurity is undefined when both sides of the split are empty")]
    EmptySplit,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid recipe line {line}: {message}")]
    Recipe { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }

    /// Whether the error stems from bad input data (as opposed to a bad configuration).
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::MissingLabelColumn(_)
                | Error::NonBinaryCell { .. }
                | Error::RaggedRow { .. }
                | Error::EmptyDataset
                | Error::NoRules
                | Error::UnknownFeature(_)
                | Error::InvalidRuleList(_)
                | Error::Recipe { .. }
        )
    }
}
