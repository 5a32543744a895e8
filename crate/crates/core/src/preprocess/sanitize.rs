//! Name sanitation and the raw/sanitized mapping used by resolvers at runtime.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::SanitationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Casing {
    /// Upper-case the character following a removed separator.
    #[default]
    Camel,
    /// Only remove illegal characters.
    Preserve,
}

/// Whether `name` matches `[_A-Za-z][_0-9A-Za-z]*`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c == '_' || c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// Strip characters that GraphQL names cannot contain.
pub fn sanitize(raw: &str, casing: Casing) -> Result<String, SanitationError> {
    let mut out = String::with_capacity(raw.len());
    let mut upper_next = false;
    for c in raw.chars() {
        if c == '_' || c.is_ascii_alphanumeric() {
            if upper_next && casing == Casing::Camel {
                out.push(c.to_ascii_uppercase());
            } else {
                out.push(c);
            }
            upper_next = false;
        } else if !out.is_empty() {
            upper_next = true;
        }
    }
    if out.is_empty() {
        return Err(SanitationError {
            raw: raw.to_string(),
            reason: "no characters allowed in GraphQL names".into(),
        });
    }
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    Ok(out)
}

/// Sanitize one enum value. Booleans, and strings that would become
/// `true`, `false` or `null`, cannot be GraphQL enum values.
pub fn sanitize_enum_value(value: &Value, casing: Casing) -> Result<String, SanitationError> {
    let raw = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => {
            return Err(SanitationError {
                raw: b.to_string(),
                reason: "boolean enum values cannot be GraphQL enum values".into(),
            })
        }
        other => {
            return Err(SanitationError {
                raw: other.to_string(),
                reason: "enum value is not a scalar".into(),
            })
        }
    };
    let name = sanitize(&raw, casing)?;
    if matches!(name.as_str(), "true" | "false" | "null") {
        return Err(SanitationError {
            raw,
            reason: format!("{name} is reserved and cannot be an enum value"),
        });
    }
    Ok(name)
}

pub fn upper_first(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

pub fn lower_first(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_ascii_lowercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

pub type ScopeId = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeKind {
    /// Keys of a JSON object (type fields, operation arguments).
    #[default]
    Object,
    /// String values of an enum.
    Enum,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Scope {
    pub kind: ScopeKind,
    pub forward: BTreeMap<String, String>,
    pub reverse: BTreeMap<String, String>,
    /// Scope that applies to the value stored under a raw key.
    pub children: BTreeMap<String, ScopeId>,
}

/// Raw/sanitized name mapping, one scope per type, operation or enum.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SanitationMap {
    pub scopes: BTreeMap<ScopeId, Scope>,
}

impl SanitationMap {
    pub fn new() -> Self {
        SanitationMap::default()
    }

    pub fn ensure_scope(&mut self, scope: &str, kind: ScopeKind) -> &mut Scope {
        self.scopes.entry(scope.to_string()).or_insert_with(|| Scope {
            kind,
            ..Scope::default()
        })
    }

    /// Record `raw` under `sanitized`, suffixing the name with the smallest
    /// free integer (from 2) when another raw name already holds it.
    pub fn register_mapping(&mut self, scope: &str, raw: &str, sanitized: &str) -> String {
        let entry = self.scopes.entry(scope.to_string()).or_default();
        if let Some(existing) = entry.forward.get(raw) {
            return existing.clone();
        }
        let mut name = sanitized.to_string();
        let mut suffix = 2;
        while entry.reverse.contains_key(&name) {
            name = format!("{sanitized}{suffix}");
            suffix += 1;
        }
        entry.forward.insert(raw.to_string(), name.clone());
        entry.reverse.insert(name.clone(), raw.to_string());
        name
    }

    /// Reserve a name that has no raw counterpart (viewer fields, placeholders).
    pub fn reserve(&mut self, scope: &str, name: &str) -> String {
        let key = format!("\u{0}{name}");
        self.register_mapping(scope, &key, name)
    }

    pub fn set_child(&mut self, scope: &str, raw: &str, child: &str) {
        self.scopes
            .entry(scope.to_string())
            .or_default()
            .children
            .insert(raw.to_string(), child.to_string());
    }

    pub fn scope(&self, scope: &str) -> Option<&Scope> {
        self.scopes.get(scope)
    }

    pub fn forward(&self, scope: &str, raw: &str) -> Option<&str> {
        self.scopes.get(scope)?.forward.get(raw).map(String::as_str)
    }

    pub fn reverse(&self, scope: &str, sanitized: &str) -> Option<&str> {
        self.scopes.get(scope)?.reverse.get(sanitized).map(String::as_str)
    }

    pub fn child(&self, scope: &str, raw: &str) -> Option<&str> {
        self.scopes.get(scope)?.children.get(raw).map(String::as_str)
    }

    pub fn contains(&self, scope: &str, sanitized: &str) -> bool {
        self.scopes
            .get(scope)
            .map(|s| s.reverse.contains_key(sanitized))
            .unwrap_or(false)
    }
}

/// Rename keys from raw to sanitized, following child scopes. Keys without
/// a mapping are dropped; the number dropped is returned alongside.
pub fn sanitize_tree(value: &Value, map: &SanitationMap, scope: Option<&str>) -> (Value, usize) {
    let mut dropped = 0;
    let out = sanitize_inner(value, map, scope, &mut dropped);
    (out, dropped)
}

fn sanitize_inner(value: &Value, map: &SanitationMap, scope: Option<&str>, dropped: &mut usize) -> Value {
    let Some(scope_id) = scope else {
        return value.clone();
    };
    let Some(scope) = map.scope(scope_id) else {
        return value.clone();
    };
    match (value, scope.kind) {
        (Value::Array(items), _) => Value::Array(
            items
                .iter()
                .map(|item| sanitize_inner(item, map, Some(scope_id), dropped))
                .collect(),
        ),
        (Value::Object(object), ScopeKind::Object) => {
            let mut out = Map::with_capacity(object.len());
            for (raw, child) in object {
                match scope.forward.get(raw) {
                    Some(name) => {
                        let child_scope = scope.children.get(raw).map(String::as_str);
                        out.insert(name.clone(), sanitize_inner(child, map, child_scope, dropped));
                    }
                    None => *dropped += 1,
                }
            }
            Value::Object(out)
        }
        (Value::String(raw), ScopeKind::Enum) => match scope.forward.get(raw) {
            Some(name) => Value::String(name.clone()),
            None => value.clone(),
        },
        _ => value.clone(),
    }
}

/// Rename keys from sanitized back to raw. Unknown keys pass through.
pub fn desanitize_tree(value: &Value, map: &SanitationMap, scope: Option<&str>) -> Value {
    let Some(scope_id) = scope else {
        return value.clone();
    };
    let Some(scope) = map.scope(scope_id) else {
        return value.clone();
    };
    match (value, scope.kind) {
        (Value::Array(items), _) => Value::Array(
            items
                .iter()
                .map(|item| desanitize_tree(item, map, Some(scope_id)))
                .collect(),
        ),
        (Value::Object(object), ScopeKind::Object) => Value::Object(
            object
                .iter()
                .map(|(name, child)| {
                    let raw = scope.reverse.get(name).cloned().unwrap_or_else(|| name.clone());
                    let child_scope = scope.children.get(&raw).map(String::as_str);
                    let restored = desanitize_tree(child, map, child_scope);
                    (raw, restored)
                })
                .collect(),
        ),
        (Value::String(name), ScopeKind::Enum) => match scope.reverse.get(name) {
            Some(raw) => Value::String(raw.clone()),
            None => value.clone(),
        },
        _ => value.clone(),
    }
}
