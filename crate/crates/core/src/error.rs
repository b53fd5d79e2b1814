use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error at line {line}: {msg}")]
    Schema { line: usize, msg: String },

    /// `row` is 1-based over data rows (the header is not counted).
    #[error("data error at row {row}, column `{column}`: {msg}")]
    Data { row: usize, column: String, msg: String },

    #[error("data error: {0}")]
    Dataset(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("query error: {0}")]
    Query(String),

    #[error("encode error: {0}")]
    Encode(String),

    #[error("column index {index} out of range (width {width})")]
    Index { index: usize, width: usize },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("shape error: expected width {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("fold error: {0}")]
    Fold(String),

    #[error("cohort error: {0}")]
    Cohort(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by the input documents (schema, data, paths)
    /// rather than by numerical or configuration problems.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::Data { .. }
                | Error::Dataset(_)
                | Error::Query(_)
                | Error::Cohort(_)
                | Error::Format(_)
                | Error::Io { .. }
        )
    }
}
