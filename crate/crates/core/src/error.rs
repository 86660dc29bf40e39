use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The input is not well-formed JSON.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// The input is well-formed but violates the record schema or an invariant.
    #[error("validation error in record `{record}`, field `{field}`: {message}")]
    Validation {
        record: String,
        field: String,
        message: String,
    },

    #[error("vector file error at line {line}: {message}")]
    VectorFile { line: usize, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("record `{0}` is unlabeled")]
    Unlabeled(String),

    #[error("record `{0}` has no words")]
    EmptyRecord(String),

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    /// Training produced a NaN or infinite loss.
    #[error("non-finite loss at epoch {epoch} on graph `{graph}`")]
    NonFinite { epoch: usize, graph: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(
        record: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Validation {
            record: record.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}
