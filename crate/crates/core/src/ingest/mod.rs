//! Loading OpenAPI documents: parsing, version detection, Swagger 2.0
//! conversion, validation and reference resolution.

mod model;
mod resolve;
mod upconvert;
mod validate;

use serde::Serialize;
use serde_json::Value;

use crate::error::IngestError;

pub use model::{
    Components, HttpMethod, LinkDefinition, LinkTarget, MediaSchema, OasDocument, OasOperation,
    ParamLocation, Parameter, RequestBody, Response, SchemaObject, SchemaType, SecurityScheme,
    SecuritySchemeKind,
};
pub use resolve::{merge_all_of, AllOfMerge};
pub(crate) use model::escape_pointer_token;
pub use upconvert::{upconvert, upconvert_value};
pub use validate::{validate, Severity, ValidationIssue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Yaml,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    pub source_path: String,
    pub format: Format,
    pub root: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Version {
    V2,
    V3,
    Unknown,
}

/// Parse raw bytes as JSON or YAML. Without a hint JSON is tried first.
pub fn load_document(
    bytes: &[u8],
    format_hint: Option<Format>,
    source_path: &str,
) -> Result<RawDocument, IngestError> {
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(IngestError::Parse("document is empty".into()));
    }
    let (format, root) = match format_hint {
        Some(Format::Json) => (Format::Json, parse_json(bytes)?),
        Some(Format::Yaml) => (Format::Yaml, parse_yaml(bytes)?),
        None => match parse_json(bytes) {
            Ok(root) => (Format::Json, root),
            Err(json_err) => match parse_yaml(bytes) {
                Ok(root) => (Format::Yaml, root),
                Err(yaml_err) => {
                    return Err(IngestError::Parse(format!(
                        "not JSON ({json_err}) and not YAML ({yaml_err})"
                    )))
                }
            },
        },
    };
    if !root.is_object() {
        return Err(IngestError::Parse("top level is not a mapping".into()));
    }
    Ok(RawDocument {
        source_path: source_path.to_string(),
        format,
        root,
    })
}

fn parse_json(bytes: &[u8]) -> Result<Value, IngestError> {
    serde_json::from_slice(bytes).map_err(|e| IngestError::Parse(e.to_string()))
}

fn parse_yaml(bytes: &[u8]) -> Result<Value, IngestError> {
    let mut value: serde_yaml::Value =
        serde_yaml::from_slice(bytes).map_err(|e| IngestError::Parse(e.to_string()))?;
    value
        .apply_merge()
        .map_err(|e| IngestError::Parse(e.to_string()))?;
    Ok(yaml_to_json(value))
}

// YAML allows non-string keys (`200:` is an integer); OpenAPI does not care,
// so keys are stringified.
fn yaml_to_json(value: serde_yaml::Value) -> Value {
    use serde_yaml::Value as Y;
    match value {
        Y::Null => Value::Null,
        Y::Bool(b) => Value::Bool(b),
        Y::Number(n) => {
            if let Some(i) = n.as_i64() {
                Value::from(i)
            } else if let Some(u) = n.as_u64() {
                Value::from(u)
            } else {
                n.as_f64()
                    .and_then(serde_json::Number::from_f64)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            }
        }
        Y::String(s) => Value::String(s),
        Y::Sequence(items) => Value::Array(items.into_iter().map(yaml_to_json).collect()),
        Y::Mapping(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (yaml_key(k), yaml_to_json(v)))
                .collect(),
        ),
        Y::Tagged(tagged) => yaml_to_json(tagged.value),
    }
}

fn yaml_key(key: serde_yaml::Value) -> String {
    match yaml_to_json(key) {
        Value::String(s) => s,
        Value::Null => "null".into(),
        other => other.to_string(),
    }
}

pub fn detect_version(doc: &RawDocument) -> Version {
    let root = &doc.root;
    if root.get("swagger").and_then(Value::as_str) == Some("2.0") {
        return Version::V2;
    }
    match root.get("openapi").and_then(Value::as_str) {
        Some(v) if v.starts_with("3.") => Version::V3,
        _ => Version::Unknown,
    }
}

/// Load, version-detect and normalize to the 3.x model in one step.
pub fn normalize(doc: &RawDocument, notes: &mut Vec<String>) -> Result<OasDocument, IngestError> {
    match detect_version(doc) {
        Version::V2 => {
            let (value, mut conversion_notes) = upconvert_value(&doc.root)?;
            notes.append(&mut conversion_notes);
            OasDocument::from_value(value)
        }
        Version::V3 => OasDocument::from_value(doc.root.clone()),
        Version::Unknown => Err(IngestError::UnknownVersion),
    }
}
