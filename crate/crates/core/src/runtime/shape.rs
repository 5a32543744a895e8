use serde_json::{Number, Value};

use crate::preprocess::{sanitize_tree, SanitationMap};

use super::http::HttpResponse;
use super::plan::ResponseBinding;
use super::RuntimeError;

/// A response body in both its upstream form and its GraphQL-named form.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedResponse {
    pub value: Value,
    pub raw: Value,
    /// Keys present upstream but absent from the schema.
    pub dropped: usize,
}

/// Parse and rename an upstream response. Non-JSON bodies are accepted only
/// when the field's type is a plain String.
pub fn shape_response(
    response: &HttpResponse,
    binding: &ResponseBinding,
    sanitation: &SanitationMap,
) -> Result<ShapedResponse, RuntimeError> {
    let text = String::from_utf8_lossy(&response.body);
    let wants_text = matches!(binding.ty.clone().nullable(), crate::schema::TypeRef::Named(ref n) if n == "String");
    let raw = if text.trim().is_empty() {
        Value::Null
    } else if !binding.json && wants_text {
        Value::String(text.into_owned())
    } else {
        match serde_json::from_str::<Value>(&text) {
            Ok(v) => v,
            Err(_) if wants_text => Value::String(text.into_owned()),
            Err(e) => return Err(RuntimeError::UpstreamNotJson(e.to_string())),
        }
    };
    let (value, dropped) = sanitize_tree(&raw, sanitation, binding.scope.as_deref());
    if dropped > 0 {
        tracing::debug!(dropped, "response keys not in schema were dropped");
    }
    Ok(ShapedResponse { value, raw, dropped })
}

/// Coerce a leaf value to a built-in scalar or enum for output.
pub fn coerce_leaf(value: &Value, type_name: &str, is_enum: bool) -> Result<Value, String> {
    if value.is_null() {
        return Ok(Value::Null);
    }
    if is_enum {
        return match value {
            Value::String(_) => Ok(value.clone()),
            other => Err(format!("{type_name} cannot represent {other}")),
        };
    }
    match (type_name, value) {
        ("String" | "ID", Value::String(_)) => Ok(value.clone()),
        ("String" | "ID", Value::Number(_) | Value::Bool(_)) => Ok(Value::String(value.to_string())),
        ("String", Value::Object(_) | Value::Array(_)) => Ok(Value::String(value.to_string())),
        ("Int", Value::Number(n)) => {
            if n.is_i64() || n.is_u64() {
                if n.as_i64().is_some_and(|i| i32::try_from(i).is_ok()) {
                    return Ok(value.clone());
                }
                tracing::info!(value = %n, "Int outside the 32-bit range returned as Float");
                let f = n.as_f64().unwrap_or(f64::NAN);
                Number::from_f64(f).map(Value::Number).ok_or_else(|| format!("Int cannot represent {n}"))
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.fract() == 0.0 && f.abs() < 9.0e15 {
                    Ok(Value::Number(Number::from(f as i64)))
                } else {
                    Err(format!("Int cannot represent non-integer value {n}"))
                }
            }
        }
        ("Float", Value::Number(_)) => Ok(value.clone()),
        ("Boolean", Value::Bool(_)) => Ok(value.clone()),
        (name, other) => Err(format!("{name} cannot represent {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::TypeRef;
    use serde_json::json;

    fn binding(ty: TypeRef, scope: Option<&str>, json: bool) -> ResponseBinding {
        ResponseBinding {
            status: "200".into(),
            ty,
            scope: scope.map(str::to_string),
            json,
        }
    }

    fn body(text: &str) -> HttpResponse {
        HttpResponse {
            status: 200,
            content_type: None,
            body: text.as_bytes().to_vec(),
        }
    }

    #[test]
    fn renames_keys_and_counts_drops() {
        let mut map = SanitationMap::new();
        map.register_mapping("User", "user-name", "userName");
        let out = shape_response(
            &body(r#"[{"user-name": "a", "extra": 1}]"#),
            &binding(TypeRef::list(TypeRef::named("User")), Some("User"), true),
            &map,
        )
        .unwrap();
        assert_eq!(out.value, json!([{"userName": "a"}]));
        assert_eq!(out.raw, json!([{"user-name": "a", "extra": 1}]));
        assert_eq!(out.dropped, 1);
    }

    #[test]
    fn non_json_only_for_strings() {
        let map = SanitationMap::new();
        let out = shape_response(&body("plain"), &binding(TypeRef::named("String"), None, false), &map).unwrap();
        assert_eq!(out.value, json!("plain"));
        let err = shape_response(&body("<html>"), &binding(TypeRef::named("User"), Some("User"), true), &map);
        assert!(matches!(err, Err(RuntimeError::UpstreamNotJson(_))));
        let empty = shape_response(&body(""), &binding(TypeRef::named("User"), None, true), &map).unwrap();
        assert_eq!(empty.value, Value::Null);
    }

    #[test]
    fn leaf_coercion() {
        assert_eq!(coerce_leaf(&json!({"a": 1}), "String", false), Ok(json!(r#"{"a":1}"#)));
        assert_eq!(coerce_leaf(&json!(3), "String", false), Ok(json!("3")));
        assert_eq!(coerce_leaf(&json!(4.0), "Int", false), Ok(json!(4)));
        assert_eq!(coerce_leaf(&json!(5_000_000_000i64), "Int", false), Ok(json!(5.0e9)));
        assert!(coerce_leaf(&json!(4.5), "Int", false).is_err());
        assert_eq!(coerce_leaf(&json!(1), "Float", false), Ok(json!(1)));
        assert!(coerce_leaf(&json!("yes"), "Boolean", false).is_err());
        assert_eq!(coerce_leaf(&json!("asc"), "Order", true), Ok(json!("asc")));
    }
}
