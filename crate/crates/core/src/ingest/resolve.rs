use std::sync::Arc;

use crate::error::IngestError;

use super::model::{lookup_pointer, OasDocument, SchemaObject, SchemaType};

const MAX_REF_CHAIN: usize = 32;
const COMPONENT_PREFIX: &str = "#/components/schemas/";

/// A schema with its `$ref` chain followed.
#[derive(Debug, Clone)]
pub struct ResolvedSchema {
    pub schema: Arc<SchemaObject>,
    /// Pointer of the last reference followed, if any.
    pub pointer: Option<String>,
    /// Name of the first `#/components/schemas/<name>` reference in the chain.
    pub component: Option<String>,
}

/// Result of flattening an `allOf` composition.
#[derive(Debug, Clone, PartialEq)]
pub struct AllOfMerge {
    pub schema: SchemaObject,
    /// Property keys whose members disagreed on `type`; these fell back to string.
    pub conflicts: Vec<String>,
}

pub(crate) fn component_name(pointer: &str) -> Option<String> {
    let name = pointer.strip_prefix(COMPONENT_PREFIX)?;
    if name.contains('/') {
        return None;
    }
    Some(name.replace("~1", "/").replace("~0", "~"))
}

impl OasDocument {
    /// Dereference a local JSON pointer to a schema object. Results are
    /// memoized, so repeated lookups return the same `Arc`.
    pub fn resolve_ref(&self, pointer: &str) -> Result<Arc<SchemaObject>, IngestError> {
        if let Some(hit) = self.ref_cache.lock().expect("ref cache poisoned").get(pointer) {
            return Ok(Arc::clone(hit));
        }
        let value = lookup_pointer(&self.root, pointer)?;
        let schema = Arc::new(SchemaObject::from_value(value));
        let mut cache = self.ref_cache.lock().expect("ref cache poisoned");
        Ok(Arc::clone(cache.entry(pointer.to_string()).or_insert(schema)))
    }

    /// Follow a schema's `$ref` chain to a concrete schema object.
    pub fn resolve_schema(&self, schema: &SchemaObject) -> Result<ResolvedSchema, IngestError> {
        let mut current = match &schema.reference {
            None => {
                return Ok(ResolvedSchema {
                    schema: Arc::new(schema.clone()),
                    pointer: None,
                    component: None,
                })
            }
            Some(pointer) => pointer.clone(),
        };
        let mut component = None;
        for _ in 0..MAX_REF_CHAIN {
            if component.is_none() {
                component = component_name(&current);
            }
            let target = self.resolve_ref(&current)?;
            match &target.reference {
                Some(next) => current = next.clone(),
                None => {
                    return Ok(ResolvedSchema {
                        schema: target,
                        pointer: Some(current),
                        component,
                    })
                }
            }
        }
        Err(IngestError::MissingRef {
            pointer: current,
            reason: "reference chain is circular or too long".into(),
        })
    }

    fn shallow_type(&self, schema: &SchemaObject) -> Option<SchemaType> {
        match self.resolve_schema(schema) {
            Ok(resolved) if !resolved.schema.all_of.is_empty() => Some(SchemaType::Object),
            Ok(resolved) => resolved.schema.schema_type.clone(),
            Err(_) => None,
        }
    }
}

/// Flatten `allOf` into one object schema: properties are unioned with later
/// members overriding earlier ones, `required` lists are unioned and
/// descriptions concatenated. Members that give a property different types
/// produce a conflict and the property becomes a string.
pub fn merge_all_of(doc: &OasDocument, schema: &SchemaObject) -> Result<AllOfMerge, IngestError> {
    merge_depth(doc, schema, 0)
}

fn has_own_shape(schema: &SchemaObject) -> bool {
    !schema.properties.is_empty()
        || !schema.required.is_empty()
        || schema.items.is_some()
        || !schema.enum_values.is_empty()
        || matches!(&schema.schema_type, Some(t) if *t != SchemaType::Object)
}

fn merge_depth(doc: &OasDocument, schema: &SchemaObject, depth: usize) -> Result<AllOfMerge, IngestError> {
    if depth > MAX_REF_CHAIN {
        return Err(IngestError::MissingRef {
            pointer: schema.reference.clone().unwrap_or_default(),
            reason: "allOf nesting is circular".into(),
        });
    }
    let expand = |member: &SchemaObject| -> Result<AllOfMerge, IngestError> {
        let resolved = doc.resolve_schema(member)?;
        if resolved.schema.all_of.is_empty() {
            Ok(AllOfMerge {
                schema: (*resolved.schema).clone(),
                conflicts: Vec::new(),
            })
        } else {
            merge_depth(doc, &resolved.schema, depth + 1)
        }
    };

    if schema.all_of.len() == 1 && !has_own_shape(schema) {
        let mut merged = expand(&schema.all_of[0])?;
        if schema.description.is_some() {
            merged.schema.description = schema.description.clone();
        }
        if schema.title.is_some() {
            merged.schema.title = schema.title.clone();
        }
        return Ok(merged);
    }

    let mut own = schema.clone();
    own.all_of.clear();
    let mut result = SchemaObject {
        schema_type: Some(SchemaType::Object),
        title: schema.title.clone(),
        ..SchemaObject::default()
    };
    let mut descriptions: Vec<String> = Vec::new();
    let mut conflicts = Vec::new();

    let mut members = Vec::with_capacity(schema.all_of.len() + 1);
    for member in &schema.all_of {
        let merged = expand(member)?;
        conflicts.extend(merged.conflicts);
        members.push(merged.schema);
    }
    members.push(own);

    for member in members {
        if let Some(description) = member.description {
            if !descriptions.contains(&description) {
                descriptions.push(description);
            }
        }
        if result.title.is_none() {
            result.title = member.title;
        }
        for (key, property) in member.properties {
            if let Some(existing) = result.properties.get(&key) {
                let before = doc.shallow_type(existing);
                let after = doc.shallow_type(&property);
                if let (Some(before), Some(after)) = (before, after) {
                    if before != after {
                        if !conflicts.contains(&key) {
                            conflicts.push(key.clone());
                        }
                        result.properties.insert(key, SchemaObject::of_type(SchemaType::String));
                        continue;
                    }
                }
            }
            if conflicts.contains(&key) {
                continue;
            }
            result.properties.insert(key, property);
        }
        for name in member.required {
            if !result.required.contains(&name) {
                result.required.push(name);
            }
        }
    }
    if !descriptions.is_empty() {
        result.description = Some(descriptions.join("\n\n"));
    }
    Ok(AllOfMerge {
        schema: result,
        conflicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc() -> OasDocument {
        OasDocument::from_value(json!({
            "openapi": "3.0.0",
            "info": {"title": "t", "version": "1"},
            "paths": {},
            "components": {"schemas": {
                "User": {"type": "object", "properties": {"id": {"type": "string"}}},
                "Alias": {"$ref": "#/components/schemas/User"},
                "Loop": {"$ref": "#/components/schemas/Loop"},
                "Named": {"type": "object", "properties": {"name": {"type": "string"}}, "required": ["name"]}
            }}
        }))
        .unwrap()
    }

    fn schema(value: serde_json::Value) -> SchemaObject {
        SchemaObject::from_value(&value)
    }

    #[test]
    fn resolves_component_refs_with_identity() {
        let d = doc();
        let a = d.resolve_ref("#/components/schemas/User").unwrap();
        let b = d.resolve_ref("#/components/schemas/User").unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.properties.len(), 1);
        let c = d.resolve_ref("#/components/schemas/User/properties/id").unwrap();
        let e = d.resolve_ref("#/components/schemas/User/properties/id").unwrap();
        assert!(Arc::ptr_eq(&c, &e));
    }

    #[test]
    fn external_and_absent_refs_fail() {
        let d = doc();
        assert!(matches!(d.resolve_ref("./other.json#/Foo"), Err(IngestError::MissingRef { .. })));
        assert!(matches!(
            d.resolve_ref("#/components/schemas/Nope"),
            Err(IngestError::MissingRef { .. })
        ));
    }

    #[test]
    fn alias_chains_keep_the_first_component_name() {
        let d = doc();
        let resolved = d.resolve_schema(&SchemaObject::reference("#/components/schemas/Alias")).unwrap();
        assert_eq!(resolved.component.as_deref(), Some("Alias"));
        assert_eq!(resolved.pointer.as_deref(), Some("#/components/schemas/User"));
        assert!(d.resolve_schema(&SchemaObject::reference("#/components/schemas/Loop")).is_err());
    }

    #[test]
    fn merges_disjoint_members() {
        let d = doc();
        let merged = merge_all_of(
            &d,
            &schema(json!({"allOf": [
                {"type": "object", "properties": {"a": {"type": "string"}}},
                {"type": "object", "properties": {"b": {"type": "integer"}}}
            ]})),
        )
        .unwrap();
        assert!(merged.conflicts.is_empty());
        let keys: Vec<_> = merged.schema.properties.keys().cloned().collect();
        assert_eq!(keys, vec!["a", "b"]);
        assert_eq!(merged.schema.properties["b"].schema_type, Some(SchemaType::Integer));
        assert!(merged.schema.required.is_empty());
    }

    #[test]
    fn single_member_is_identity() {
        let d = doc();
        let merged = merge_all_of(&d, &schema(json!({"allOf": [{"$ref": "#/components/schemas/Named"}]}))).unwrap();
        assert_eq!(&merged.schema, d.components.schemas["Named"].as_ref());
    }

    #[test]
    fn unions_required_and_resolves_refs() {
        let d = doc();
        let merged = merge_all_of(
            &d,
            &schema(json!({
                "description": "own",
                "allOf": [
                    {"$ref": "#/components/schemas/Named"},
                    {"type": "object", "description": "extra", "required": ["age"], "properties": {"age": {"type": "integer"}}}
                ]
            })),
        )
        .unwrap();
        assert_eq!(merged.schema.required, vec!["name", "age"]);
        assert_eq!(merged.schema.description.as_deref(), Some("extra\n\nown"));
    }

    #[test]
    fn conflicting_property_types_fall_back_to_string() {
        let d = doc();
        let merged = merge_all_of(
            &d,
            &schema(json!({"allOf": [
                {"properties": {"a": {"type": "string"}}},
                {"properties": {"a": {"type": "integer"}}}
            ]})),
        )
        .unwrap();
        assert_eq!(merged.conflicts, vec!["a"]);
        assert_eq!(merged.schema.properties["a"].schema_type, Some(SchemaType::String));
    }

    #[test]
    fn later_members_override_compatible_properties() {
        let d = doc();
        let merged = merge_all_of(
            &d,
            &schema(json!({"allOf": [
                {"properties": {"a": {"type": "string"}}},
                {"properties": {"a": {"type": "string", "description": "second"}}}
            ]})),
        )
        .unwrap();
        assert!(merged.conflicts.is_empty());
        assert_eq!(merged.schema.properties["a"].description.as_deref(), Some("second"));
    }
}
