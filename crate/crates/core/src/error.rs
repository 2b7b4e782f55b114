use serde::Serialize;
use thiserror::Error;

use crate::analytics::AnalyticsError;
use crate::ingest::IngestError;
use crate::query::QueryError;
use crate::schema::SchemaError;
use crate::store::StoreError;

/// Crate-wide error, carrying a stable machine token via [`Error::code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("{0}")]
    BadRequest(String),
    #[error("response has {0} items, above the 10000 item cap")]
    TooLarge(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Schema(e) => match e {
                SchemaError::DuplicateLayer(_) => "DuplicateLayer",
                SchemaError::NameCollision(_) => "NameCollision",
                SchemaError::DanglingReference { .. } => "DanglingReference",
                SchemaError::InvalidName(_) => "InvalidName",
                SchemaError::LayerParse(_) => "ParseError",
            },
            Error::Store(e) => match e {
                StoreError::SchemaViolation { .. } => "SchemaViolation",
                StoreError::ClassChangeRejected { .. } => "ClassChangeRejected",
                StoreError::DanglingEndpoint { .. } => "DanglingEndpoint",
                StoreError::NotFound(_) => "UnknownEntity",
                StoreError::InvalidId(_) => "InvalidId",
                StoreError::InvalidInterval(_) => "InvalidInterval",
                StoreError::Parse { .. } => "ParseError",
                StoreError::InvalidBaseIri(_) => "InvalidBaseIri",
            },
            Error::Ingest(e) => match e {
                IngestError::UnknownKind(_) => "UnknownKind",
                IngestError::Header { .. } | IngestError::Csv(_) => "ParseError",
                IngestError::EmptyName => "EmptyName",
            },
            Error::Query(e) => match e {
                QueryError::UnknownEntity(_) => "UnknownEntity",
                QueryError::UnknownArea(_) => "UnknownArea",
            },
            Error::Analytics(e) => match e {
                AnalyticsError::UnknownEntity(_) => "UnknownEntity",
                AnalyticsError::InvalidWeights => "InvalidWeights",
            },
            Error::BadRequest(_) => "BadRequest",
            Error::TooLarge(_) => "ResponseTooLarge",
            Error::Io(_) => "IoError",
        }
    }

    /// HTTP status for this error.
    pub fn status(&self) -> u16 {
        match self.code() {
            "UnknownEntity" | "UnknownArea" => 404,
            "ClassChangeRejected" | "DuplicateLayer" | "NameCollision" => 409,
            "BadRequest" | "UnknownKind" | "InvalidBaseIri" | "InvalidWeights" => 400,
            "ResponseTooLarge" => 413,
            "IoError" => 500,
            _ => 422,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { code: self.code(), message: self.to_string() }
    }
}
