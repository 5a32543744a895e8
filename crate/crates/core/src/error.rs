use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::report::WarningKind;

/// Why a generation run did not produce a schema.
///
/// The first three variants are the failure causes a non-strict run can hit.
/// `Strict` carries the warning cause that aborted a strict run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    InvalidOas,
    SanitationError,
    MissingRef,
    Strict(WarningKind),
    Internal,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::InvalidOas => "InvalidOas",
            ErrorKind::SanitationError => "SanitationError",
            ErrorKind::MissingRef => "MissingRef",
            ErrorKind::Strict(kind) => kind.as_str(),
            ErrorKind::Internal => "Internal",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ErrorKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind}: {message}")]
pub struct GenerateError {
    pub kind: ErrorKind,
    pub message: String,
    pub location: Option<String>,
}

impl GenerateError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        GenerateError {
            kind,
            message: message.into(),
            location: None,
        }
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }
}

/// Failures while loading and normalizing an OpenAPI document.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("failed to parse document: {0}")]
    Parse(String),
    #[error("document is neither Swagger 2.0 nor OpenAPI 3.x")]
    UnknownVersion,
    #[error("cannot convert Swagger 2.0 document: {0}")]
    Upconvert(String),
    #[error("malformed document at {location}: {message}")]
    Structure { location: String, message: String },
    #[error("cannot resolve reference {pointer}: {reason}")]
    MissingRef { pointer: String, reason: String },
    #[error("document failed validation: {0}")]
    Invalid(String),
}

impl IngestError {
    pub fn structure(location: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::Structure {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<IngestError> for GenerateError {
    fn from(err: IngestError) -> Self {
        let kind = match err {
            IngestError::MissingRef { .. } => ErrorKind::MissingRef,
            _ => ErrorKind::InvalidOas,
        };
        let location = match &err {
            IngestError::Structure { location, .. } => Some(location.clone()),
            IngestError::MissingRef { pointer, .. } => Some(pointer.clone()),
            _ => None,
        };
        GenerateError {
            kind,
            message: err.to_string(),
            location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot sanitize {raw:?}: {reason}")]
pub struct SanitationError {
    pub raw: String,
    pub reason: String,
}

impl From<SanitationError> for GenerateError {
    fn from(err: SanitationError) -> Self {
        GenerateError::new(ErrorKind::SanitationError, err.to_string())
    }
}
