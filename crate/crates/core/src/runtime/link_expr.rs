//! The supported subset of OpenAPI runtime expressions.

use serde::Serialize;
use serde_json::{Map, Value};

use super::RuntimeError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", content = "value", rename_all = "snake_case")]
pub enum LinkExpr {
    /// `$response.body#/json/pointer`
    ResponseBody(String),
    /// `$request.path.name`
    RequestPath(String),
    /// `$request.query.name`
    RequestQuery(String),
    /// A constant value (anything that is not an expression).
    Literal(Value),
}

pub fn parse_link_expression(text: &str) -> Result<LinkExpr, String> {
    let trimmed = text.trim();
    let inner = match trimmed.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        Some(inner) if inner.starts_with('$') => inner,
        _ => trimmed,
    };
    if !inner.starts_with('$') {
        return Ok(LinkExpr::Literal(Value::String(text.to_string())));
    }
    if let Some(pointer) = inner.strip_prefix("$response.body") {
        return match pointer.strip_prefix('#') {
            Some(ptr) if ptr.is_empty() || ptr.starts_with('/') => Ok(LinkExpr::ResponseBody(ptr.to_string())),
            None if pointer.is_empty() => Ok(LinkExpr::ResponseBody(String::new())),
            _ => Err(format!("malformed body pointer in {text:?}")),
        };
    }
    if let Some(name) = inner.strip_prefix("$request.path.") {
        if !name.is_empty() {
            return Ok(LinkExpr::RequestPath(name.to_string()));
        }
    }
    if let Some(name) = inner.strip_prefix("$request.query.") {
        if !name.is_empty() {
            return Ok(LinkExpr::RequestQuery(name.to_string()));
        }
    }
    Err(format!("runtime expression {text:?} is not supported"))
}

fn decode_pointer(pointer: &str) -> String {
    percent_encoding::percent_decode_str(pointer).decode_utf8_lossy().into_owned()
}

/// Evaluate against the parent's raw upstream response and the parameter
/// values (by raw name) its request was sent with.
pub fn eval_link_expression(
    expr: &LinkExpr,
    parent_response: &Value,
    parent_params: &Map<String, Value>,
) -> Result<Value, RuntimeError> {
    let missing = |what: String| RuntimeError::ExpressionUnresolvable(what);
    match expr {
        LinkExpr::ResponseBody(pointer) => parent_response
            .pointer(&decode_pointer(pointer))
            .cloned()
            .ok_or_else(|| missing(format!("$response.body#{pointer} is absent from the response"))),
        LinkExpr::RequestPath(name) | LinkExpr::RequestQuery(name) => parent_params
            .get(name)
            .cloned()
            .ok_or_else(|| missing(format!("parent request had no parameter {name:?}"))),
        LinkExpr::Literal(value) => Ok(value.clone()),
    }
}
