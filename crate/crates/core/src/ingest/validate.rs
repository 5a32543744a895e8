use serde::Serialize;
use serde_json::Value;

use super::model::{escape_pointer_token, OasDocument, ParamLocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Fatal,
    Note,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl ValidationIssue {
    fn fatal(location: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: Severity::Fatal,
            location: location.into(),
            message: message.into(),
        }
    }
}

fn is_status_code(code: &str) -> bool {
    if code == "default" {
        return true;
    }
    let bytes = code.as_bytes();
    bytes.len() == 3
        && (b'1'..=b'5').contains(&bytes[0])
        && ((bytes[1].is_ascii_digit() && bytes[2].is_ascii_digit())
            || (bytes[1].eq_ignore_ascii_case(&b'x') && bytes[2].eq_ignore_ascii_case(&b'x')))
}

/// Structural checks on a normalized document. Any fatal issue means the
/// document is rejected as invalid.
pub fn validate(doc: &OasDocument) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let root = &doc.root;

    match root.get("info") {
        Some(info) if info.is_object() => {
            if !info.get("title").map(Value::is_string).unwrap_or(false) {
                issues.push(ValidationIssue::fatal("/info/title", "info.title is required"));
            }
            if info.get("version").is_none() {
                issues.push(ValidationIssue::fatal("/info/version", "info.version is required"));
            }
        }
        _ => issues.push(ValidationIssue::fatal("/info", "info object is required")),
    }
    if !root.get("paths").map(Value::is_object).unwrap_or(false) {
        issues.push(ValidationIssue::fatal("/paths", "paths object is required"));
    }

    for op in &doc.operations {
        let template = op.path_template_params();
        for name in &template {
            let declared = op
                .parameters
                .iter()
                .filter(|p| p.location == ParamLocation::Path && &p.name == name)
                .count();
            if declared != 1 {
                issues.push(ValidationIssue::fatal(
                    &op.pointer,
                    format!("path parameter {{{name}}} is declared {declared} times, expected exactly once"),
                ));
            }
        }
        for param in &op.parameters {
            if param.location == ParamLocation::Path && !template.contains(&param.name) {
                issues.push(ValidationIssue::fatal(
                    &param.pointer,
                    format!("path parameter {} does not appear in {}", param.name, op.path),
                ));
            }
        }
        for code in op.responses.keys() {
            if !is_status_code(code) {
                issues.push(ValidationIssue::fatal(
                    format!("{}/responses/{}", op.pointer, escape_pointer_token(code)),
                    format!("{code:?} is not a status code"),
                ));
            }
        }
        for scheme in &op.security {
            if !doc.components.security_schemes.contains_key(scheme) {
                issues.push(ValidationIssue::fatal(
                    &op.pointer,
                    format!("security scheme {scheme} is not defined"),
                ));
            }
        }
    }

    check_refs(root, String::new(), &mut issues);
    issues
}

fn check_refs(value: &Value, pointer: String, issues: &mut Vec<ValidationIssue>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                let child_ptr = format!("{pointer}/{}", escape_pointer_token(key));
                if key == "$ref" && !child.is_string() {
                    issues.push(ValidationIssue::fatal(child_ptr, "$ref must be a string"));
                } else {
                    check_refs(child, child_ptr, issues);
                }
            }
        }
        Value::Array(items) => {
            for (index, child) in items.iter().enumerate() {
                check_refs(child, format!("{pointer}/{index}"), issues);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(value: Value) -> OasDocument {
        OasDocument::from_value(value).unwrap()
    }

    fn minimal() -> Value {
        json!({
            "openapi": "3.0.0",
            "info": {"title": "t", "version": "1"},
            "paths": {"/ping": {"get": {"responses": {"200": {
                "description": "ok",
                "content": {"application/json": {"schema": {"type": "string"}}}
            }}}}}
        })
    }

    #[test]
    fn minimal_document_is_valid() {
        assert!(validate(&doc(minimal())).is_empty());
    }

    #[test]
    fn undeclared_path_parameter_is_fatal() {
        let mut value = minimal();
        value["paths"] = json!({"/users/{id}": {"get": {"responses": {}}}});
        let issues = validate(&doc(value));
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Fatal);
    }

    #[test]
    fn missing_title_is_fatal() {
        let mut value = minimal();
        value["info"] = json!({"version": "1"});
        let issues = validate(&doc(value));
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].location, "/info/title");
    }

    #[test]
    fn bad_status_codes_and_refs() {
        let mut value = minimal();
        value["paths"]["/ping"]["get"]["responses"]["2XX"] = json!({"description": "ok"});
        value["paths"]["/ping"]["get"]["responses"]["ok"] = json!({"description": "bad"});
        value["x-thing"] = json!({"$ref": 3});
        let issues = validate(&doc(value));
        assert_eq!(issues.len(), 2, "{issues:?}");
    }

    #[test]
    fn undefined_security_scheme() {
        let mut value = minimal();
        value["security"] = json!([{"nope": []}]);
        assert_eq!(validate(&doc(value)).len(), 1);
    }
}
