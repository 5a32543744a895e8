//! The types dictionary: every object and enum schema reachable from an
//! operation, de-duplicated by structure and given a unique GraphQL name.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;

use crate::error::GenerateError;
use crate::ingest::{escape_pointer_token, HttpMethod, OasDocument, SchemaObject};
use crate::report::{Report, WarningKind};

use super::analysis::{analyze_operation, classify, report_classified, Classified, OperationShape, Shape};
use super::sanitize::{sanitize, sanitize_enum_value, Casing, SanitationMap, ScopeKind};

/// Names that generated types may never take.
pub const RESERVED_TYPE_NAMES: [&str; 9] = [
    "Query",
    "Mutation",
    "String",
    "Int",
    "Float",
    "Boolean",
    "ID",
    "ApiKeyCredentialsInput",
    "BasicAuthCredentialsInput",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Object,
    Enum,
}

/// The naming rule that produced an entry's name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NameOrigin {
    Component { name: String },
    Title { title: String },
    Operation { method: HttpMethod, path: String },
    Property { key: String },
    /// Every candidate was taken; the first one got a numeric suffix.
    Suffixed { base: Box<NameOrigin>, suffix: u32 },
    /// No candidate survived sanitation.
    Generic,
}

/// Where a schema was met, for the naming fallbacks.
#[derive(Debug, Clone, Default)]
pub struct NameContext {
    pub operation: Option<(HttpMethod, String)>,
    pub property: Option<String>,
}

impl NameContext {
    pub fn operation(method: HttpMethod, path: &str) -> Self {
        NameContext {
            operation: Some((method, path.to_string())),
            property: None,
        }
    }

    pub fn property(key: &str) -> Self {
        NameContext {
            operation: None,
            property: Some(key.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryField {
    pub raw: String,
    pub name: String,
    #[serde(skip)]
    pub schema: SchemaObject,
    pub location: String,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumValue {
    pub raw: Value,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryEntry {
    pub name: String,
    pub kind: EntryKind,
    pub direction: Direction,
    pub origin: NameOrigin,
    #[serde(skip)]
    pub schema: SchemaObject,
    pub description: Option<String>,
    pub location: String,
    #[serde(skip)]
    pub fingerprint: String,
    /// Object properties in key order.
    pub fields: Vec<EntryField>,
    pub values: Vec<EnumValue>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TypesDictionary {
    pub entries: IndexMap<String, DictionaryEntry>,
    #[serde(skip)]
    pub by_structure: BTreeMap<Direction, HashMap<String, String>>,
    /// Analysis of every operation, `None` for skipped ones.
    #[serde(skip)]
    pub operations: Vec<Option<OperationShape>>,
    #[serde(skip)]
    pub sanitation: SanitationMap,
    #[serde(skip)]
    pub casing: Casing,
    #[serde(skip)]
    taken: HashSet<String>,
}

/// Structural normal form: properties sorted, `required` and `enum` as sorted
/// sets, `title`, `description`, `format` and `default` dropped. Nested
/// references stay as their pointers.
pub fn canonical_form(schema: &SchemaObject) -> Value {
    if let Some(reference) = &schema.reference {
        return serde_json::json!({ "$ref": reference });
    }
    let mut form: BTreeMap<&str, Value> = BTreeMap::new();
    if let Some(t) = &schema.schema_type {
        form.insert("type", Value::String(t.as_str().to_string()));
    }
    if !schema.properties.is_empty() {
        let props: BTreeMap<&String, Value> = schema
            .properties
            .iter()
            .map(|(key, child)| (key, canonical_form(child)))
            .collect();
        form.insert("properties", serde_json::to_value(props).expect("map serializes"));
    }
    if let Some(items) = &schema.items {
        form.insert("items", canonical_form(items));
    }
    if !schema.required.is_empty() {
        let set: BTreeSet<&String> = schema.required.iter().collect();
        form.insert("required", serde_json::to_value(set).expect("set serializes"));
    }
    if !schema.enum_values.is_empty() {
        let set: BTreeMap<String, &Value> = schema.enum_values.iter().map(|v| (v.to_string(), v)).collect();
        form.insert("enum", Value::Array(set.into_values().cloned().collect()));
    }
    for (key, members) in [("allOf", &schema.all_of), ("oneOf", &schema.one_of), ("anyOf", &schema.any_of)] {
        if !members.is_empty() {
            form.insert(key, Value::Array(members.iter().map(canonical_form).collect()));
        }
    }
    serde_json::to_value(form).expect("form serializes")
}

pub fn fingerprint(schema: &SchemaObject) -> String {
    canonical_form(schema).to_string()
}

pub fn deep_equal(a: &SchemaObject, b: &SchemaObject) -> bool {
    canonical_form(a) == canonical_form(b)
}

impl TypesDictionary {
    pub fn new(casing: Casing) -> Self {
        TypesDictionary {
            casing,
            taken: RESERVED_TYPE_NAMES.iter().map(|s| s.to_string()).collect(),
            ..TypesDictionary::default()
        }
    }

    pub fn is_taken(&self, name: &str) -> bool {
        self.taken.contains(name)
    }

    /// Reserve a type name outside the dictionary (viewer types), suffixing
    /// it when taken.
    pub fn claim_name(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut suffix = 2;
        while self.taken.contains(&name) {
            name = format!("{base}{suffix}");
            suffix += 1;
        }
        self.taken.insert(name.clone());
        name
    }

    /// Entry for a resolved schema in the given direction. Enums always live
    /// in the output direction.
    pub fn lookup(&self, schema: &SchemaObject, kind: EntryKind, direction: Direction) -> Option<&DictionaryEntry> {
        let direction = if kind == EntryKind::Enum { Direction::Output } else { direction };
        let name = self.by_structure.get(&direction)?.get(&fingerprint(schema))?;
        self.entries.get(name)
    }

    pub fn entries_in(&self, direction: Direction) -> impl Iterator<Item = &DictionaryEntry> {
        self.entries.values().filter(move |e| e.direction == direction)
    }

    /// Pick a name by priority: component name, title, method and path,
    /// property key. Taken or unsanitizable candidates fall through; when all
    /// are taken the first one gets the smallest free suffix from 2.
    pub fn canonical_name(
        &self,
        component: Option<&str>,
        schema: &SchemaObject,
        context: &NameContext,
        direction: Direction,
    ) -> (String, NameOrigin) {
        let mut candidates: Vec<(String, NameOrigin)> = Vec::new();
        if let Some(name) = component {
            candidates.push((name.to_string(), NameOrigin::Component { name: name.to_string() }));
        }
        if let Some(title) = &schema.title {
            candidates.push((title.clone(), NameOrigin::Title { title: title.clone() }));
        }
        if let Some((method, path)) = &context.operation {
            candidates.push((
                format!("{}{}", method.as_lower(), path),
                NameOrigin::Operation {
                    method: *method,
                    path: path.clone(),
                },
            ));
        }
        if let Some(key) = &context.property {
            candidates.push((key.clone(), NameOrigin::Property { key: key.clone() }));
        }
        let suffix = if direction == Direction::Input { "Input" } else { "" };
        let mut first: Option<(String, NameOrigin)> = None;
        for (raw, origin) in candidates {
            let Ok(clean) = sanitize(&raw, self.casing) else {
                continue;
            };
            let name = format!("{clean}{suffix}");
            if !self.taken.contains(&name) && !name.starts_with("__") {
                return (name, origin);
            }
            if first.is_none() {
                first = Some((clean, origin));
            }
        }
        let (base, origin) = first.unwrap_or_else(|| ("Type".to_string(), NameOrigin::Generic));
        let mut n = 2;
        loop {
            let name = format!("{base}{n}{suffix}");
            if !self.taken.contains(&name) {
                let origin = match origin {
                    NameOrigin::Generic => NameOrigin::Generic,
                    other => NameOrigin::Suffixed {
                        base: Box::new(other),
                        suffix: n,
                    },
                };
                return (name, origin);
            }
            n += 1;
        }
    }

    fn insert(&mut self, entry: DictionaryEntry) {
        self.taken.insert(entry.name.clone());
        self.by_structure
            .entry(entry.direction)
            .or_default()
            .insert(entry.fingerprint.clone(), entry.name.clone());
        self.entries.insert(entry.name.clone(), entry);
    }

    /// Register a schema and, recursively, everything nested in it. Returns
    /// the sanitation scope (type name) of the object or enum it resolves
    /// to, looking through arrays.
    pub fn visit(
        &mut self,
        doc: &OasDocument,
        report: &mut Report,
        schema: &SchemaObject,
        location: &str,
        direction: Direction,
        context: &NameContext,
    ) -> Result<Option<String>, GenerateError> {
        let classified = classify(doc, schema, location)?;
        report_classified(report, &classified)?;
        match &classified.shape {
            Shape::Scalar(_) | Shape::Fallback { .. } => Ok(None),
            Shape::List(items) => {
                let items = items.clone();
                let location = format!("{}/items", classified.location);
                self.visit(doc, report, &items, &location, direction, context)
            }
            Shape::Enum => self.add_enum(&classified, context).map(Some),
            Shape::Object => self.add_object(doc, report, classified, direction, context).map(Some),
        }
    }

    fn add_enum(&mut self, classified: &Classified, context: &NameContext) -> Result<String, GenerateError> {
        let schema = &classified.schema;
        if let Some(entry) = self.lookup(schema, EntryKind::Enum, Direction::Output) {
            return Ok(entry.name.clone());
        }
        let (name, origin) = self.canonical_name(classified.component.as_deref(), schema, context, Direction::Output);
        self.sanitation.ensure_scope(&name, ScopeKind::Enum);
        let mut values = Vec::with_capacity(schema.enum_values.len());
        for raw in &schema.enum_values {
            let clean = sanitize_enum_value(raw, self.casing)
                .map_err(|e| GenerateError::from(e).at(format!("{}/enum", classified.location)))?;
            let key = raw.as_str().map(str::to_string).unwrap_or_else(|| raw.to_string());
            let final_name = self.sanitation.register_mapping(&name, &key, &clean);
            if !values.iter().any(|v: &EnumValue| v.name == final_name) {
                values.push(EnumValue {
                    raw: raw.clone(),
                    name: final_name,
                });
            }
        }
        self.insert(DictionaryEntry {
            name: name.clone(),
            kind: EntryKind::Enum,
            direction: Direction::Output,
            origin,
            schema: schema.clone(),
            description: schema.description.clone(),
            location: classified.location.clone(),
            fingerprint: fingerprint(schema),
            fields: Vec::new(),
            values,
        });
        Ok(name)
    }

    fn add_object(
        &mut self,
        doc: &OasDocument,
        report: &mut Report,
        classified: Classified,
        direction: Direction,
        context: &NameContext,
    ) -> Result<String, GenerateError> {
        if let Some(entry) = self.lookup(&classified.schema, EntryKind::Object, direction) {
            return Ok(entry.name.clone());
        }
        let (name, origin) =
            self.canonical_name(classified.component.as_deref(), &classified.schema, context, direction);
        self.sanitation.ensure_scope(&name, ScopeKind::Object);
        self.insert(DictionaryEntry {
            name: name.clone(),
            kind: EntryKind::Object,
            direction,
            origin,
            schema: classified.schema.clone(),
            description: classified.schema.description.clone(),
            location: classified.location.clone(),
            fingerprint: fingerprint(&classified.schema),
            fields: Vec::new(),
            values: Vec::new(),
        });

        let mut keys: Vec<&String> = classified.schema.properties.keys().collect();
        keys.sort();
        let mut fields = Vec::with_capacity(keys.len());
        for key in keys {
            let property = &classified.schema.properties[key];
            let location = format!("{}/properties/{}", classified.location, escape_pointer_token(key));
            let clean = sanitize(key, self.casing).map_err(|e| GenerateError::from(e).at(&location))?;
            let field_name = self.sanitation.register_mapping(&name, key, &clean);
            if let Some(child) = self.visit(doc, report, property, &location, direction, &NameContext::property(key))? {
                self.sanitation.set_child(&name, key, &child);
            }
            fields.push(EntryField {
                raw: key.clone(),
                name: field_name,
                schema: property.clone(),
                location,
                required: classified.schema.is_required(key),
            });
        }
        self.entries.get_mut(&name).expect("entry just inserted").fields = fields;
        Ok(name)
    }
}

/// Analyze every operation and register all schemas reachable from the
/// surviving ones. Operations are visited in document order.
pub fn build_types_dictionary(
    doc: &OasDocument,
    report: &mut Report,
    casing: Casing,
) -> Result<TypesDictionary, GenerateError> {
    let mut dict = TypesDictionary::new(casing);
    for index in 0..doc.operations.len() {
        let shape = analyze_operation(doc, index, report)?;
        if let Some(shape) = &shape {
            let op = &doc.operations[index];
            let context = NameContext::operation(op.method, &op.path);
            if let Some(schema) = &shape.response.schema {
                dict.visit(doc, report, schema, &shape.response.location, Direction::Output, &context)?;
            }
            if let Some(body) = &shape.body {
                if let Some(schema) = &body.schema {
                    dict.visit(doc, report, schema, &body.location, Direction::Input, &context)?;
                }
            }
            for &i in &shape.params {
                let param = &op.parameters[i];
                match &param.schema {
                    Some(schema) => {
                        let location = format!("{}/schema", param.pointer);
                        dict.visit(doc, report, schema, &location, Direction::Input, &NameContext::property(&param.name))?;
                    }
                    None => report.record_warning(
                        WarningKind::InvalidSchemaType,
                        &param.pointer,
                        format!("parameter {:?} declares no schema", param.name),
                        "argument typed as String",
                    )?,
                }
            }
        }
        dict.operations.push(shape);
    }
    Ok(dict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;
    use crate::report::Mode;
    use serde_json::json;

    fn doc(value: Value) -> OasDocument {
        OasDocument::from_value(value).unwrap()
    }

    fn schema(value: Value) -> SchemaObject {
        SchemaObject::from_value(&value)
    }

    fn get(schema: Value) -> Value {
        json!({"responses": {"200": {"description": "ok", "content": {"application/json": {"schema": schema}}}}})
    }

    fn build(value: Value) -> (TypesDictionary, Report) {
        let d = doc(value);
        let mut report = Report::new("t", Mode::NonStrict);
        let dict = build_types_dictionary(&d, &mut report, Casing::Camel).unwrap();
        (dict, report)
    }

    #[test]
    fn deep_equal_rules() {
        let a = schema(json!({"type": "object", "properties": {"a": {"type": "string"}, "b": {"type": "integer"}}}));
        let b = schema(json!({"type": "object", "properties": {"b": {"type": "integer"}, "a": {"type": "string"}}}));
        assert!(deep_equal(&a, &b));
        assert!(deep_equal(
            &schema(json!({"type": "string", "enum": ["x", "y"]})),
            &schema(json!({"type": "string", "enum": ["y", "x"]}))
        ));
        assert!(!deep_equal(
            &schema(json!({"type": "object", "properties": {"a": {"type": "string"}}})),
            &schema(json!({"type": "object", "properties": {"a": {"type": "string"}, "c": {"type": "boolean"}}}))
        ));
        assert!(deep_equal(
            &schema(json!({"type": "string", "title": "A", "description": "x"})),
            &schema(json!({"type": "string"}))
        ));
        assert!(deep_equal(
            &schema(json!({"type": "object", "required": ["a", "b"], "properties": {"a": {}, "b": {}}})),
            &schema(json!({"type": "object", "required": ["b", "a"], "properties": {"a": {}, "b": {}}}))
        ));
    }

    #[test]
    fn shared_component_gives_one_entry() {
        let (dict, _) = build(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {
                "/users/{id}": {"get": get(json!({"$ref": "#/components/schemas/User"}))},
                "/me": {"get": get(json!({"$ref": "#/components/schemas/User"}))}
            },
            "components": {"schemas": {"User": {"type": "object", "properties": {"id": {"type": "string"}}}}}
        }));
        assert_eq!(dict.entries.len(), 1);
        let user = &dict.entries["User"];
        assert_eq!(user.origin, NameOrigin::Component { name: "User".into() });
        assert_eq!(dict.operations.len(), 2);
    }

    #[test]
    fn empty_document_gives_empty_dictionary() {
        let (dict, report) = build(json!({"openapi": "3.0.0", "info": {"title": "t", "version": "1"}, "paths": {}}));
        assert!(dict.entries.is_empty());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn naming_fallbacks() {
        let inline = json!({"type": "object", "properties": {
            "id": {"type": "string"},
            "address": {"type": "object", "properties": {"city": {"type": "string"}}}
        }});
        let (dict, _) = build(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {"/users/{id}": {"get": {
                "parameters": [{"name": "id", "in": "path", "required": true, "schema": {"type": "string"}}],
                "responses": {"200": {"description": "ok", "content": {"application/json": {"schema": inline}}}}
            }}}
        }));
        let names: Vec<&String> = dict.entries.keys().collect();
        assert_eq!(names, vec!["getUsersId", "address"]);
        assert_eq!(dict.entries["address"].origin, NameOrigin::Property { key: "address".into() });
        assert_eq!(dict.sanitation.child("getUsersId", "address"), Some("address"));
    }

    #[test]
    fn titles_beat_paths_and_collisions_fall_through() {
        let d = doc(json!({"openapi": "3.0.0", "info": {"title": "t", "version": "1"}, "paths": {}}));
        let mut dict = TypesDictionary::new(Casing::Camel);
        let s = schema(json!({"type": "object", "title": "Query", "properties": {"a": {"type": "string"}}}));
        let ctx = NameContext::operation(HttpMethod::Get, "/a");
        let (name, origin) = dict.canonical_name(None, &s, &ctx, Direction::Output);
        assert_eq!(name, "getA");
        assert!(matches!(origin, NameOrigin::Operation { .. }));
        dict.claim_name("getA");
        let (name, origin) = dict.canonical_name(None, &s, &ctx, Direction::Output);
        assert_eq!(name, "Query2");
        assert!(matches!(origin, NameOrigin::Suffixed { suffix: 2, .. }));
        let (name, _) = dict.canonical_name(Some("Pet"), &s, &ctx, Direction::Input);
        assert_eq!(name, "PetInput");
        drop(d);
    }

    #[test]
    fn structurally_equal_inline_schemas_dedupe_per_direction() {
        let body = json!({"type": "object", "properties": {"n": {"type": "integer"}}});
        let (dict, _) = build(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {
                "/a": {"get": get(body.clone())},
                "/b": {"get": get(body.clone())},
                "/c": {"post": {
                    "requestBody": {"content": {"application/json": {"schema": body.clone()}}},
                    "responses": {"201": {"description": "ok", "content": {"application/json": {"schema": body}}}}
                }}
            }
        }));
        assert_eq!(dict.entries_in(Direction::Output).count(), 1);
        assert_eq!(dict.entries_in(Direction::Input).count(), 1);
        assert!(dict.entries.contains_key("getA"));
        assert!(dict.entries.contains_key("postCInput"));
    }

    #[test]
    fn enums_are_shared_and_boolean_enums_fail() {
        let (dict, _) = build(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {"/a": {"get": {
                "parameters": [{"name": "order", "in": "query", "schema": {"type": "string", "enum": ["asc", "desc"]}}],
                "responses": {"200": {"description": "ok", "content": {"application/json": {"schema":
                    {"type": "object", "properties": {"order": {"type": "string", "enum": ["desc", "asc"]}}}
                }}}}
            }}}
        }));
        assert_eq!(dict.entries.len(), 2);
        let order = &dict.entries["order"];
        assert_eq!(order.kind, EntryKind::Enum);
        assert_eq!(order.values.len(), 2);

        let d = doc(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {"/a": {"get": get(json!({"type": "object", "properties": {"flag": {"type": "boolean", "enum": [true, false]}}}))}}
        }));
        let mut report = Report::new("t", Mode::NonStrict);
        let err = build_types_dictionary(&d, &mut report, Casing::Camel).unwrap_err();
        assert_eq!(err.kind, ErrorKind::SanitationError);
    }

    #[test]
    fn cycles_terminate() {
        let (dict, _) = build(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {"/n": {"get": get(json!({"$ref": "#/components/schemas/Node"}))}},
            "components": {"schemas": {"Node": {"type": "object", "properties": {
                "next": {"$ref": "#/components/schemas/Node"},
                "kids": {"type": "array", "items": {"$ref": "#/components/schemas/Node"}}
            }}}}
        }));
        assert_eq!(dict.entries.len(), 1);
        assert_eq!(dict.sanitation.child("Node", "next"), Some("Node"));
        assert_eq!(dict.sanitation.child("Node", "kids"), Some("Node"));
    }

    #[test]
    fn warnings_for_untyped_and_unknown_schemas() {
        let (_, report) = build(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {"/a": {"get": get(json!({"type": "object", "properties": {
                "blob": {"type": "file"},
                "any": {}
            }}))}}
        }));
        assert_eq!(report.count(WarningKind::UnknownSchemaType), 1);
        assert_eq!(report.count(WarningKind::InvalidSchemaType), 1);
        let locations: Vec<&str> = report.warnings.iter().map(|w| w.location.as_str()).collect();
        assert!(locations.contains(&"/paths/~1a/get/responses/200/content/application~1json/schema/properties/blob"));
    }

    #[test]
    fn rebuilds_are_deterministic() {
        let value = json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {"/a/{x}": {"get": {
                "parameters": [{"name": "x", "in": "path", "required": true, "schema": {"type": "string"}}],
                "responses": {"200": {"description": "ok", "content": {"application/json": {"schema":
                    {"type": "object", "properties": {"z": {"type": "object", "properties": {"q": {"type": "string"}}}, "a-b": {"type": "string"}}}
                }}}}
            }}}
        });
        let (a, _) = build(value.clone());
        let (b, _) = build(value);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
