//! Swagger 2.0 to OpenAPI 3.0 conversion for the commonly used subset:
//! host/basePath/schemes, body and formData parameters, definitions,
//! securityDefinitions and produces/consumes.

use serde_json::{json, Map, Value};

use crate::error::IngestError;

use super::model::{escape_pointer_token, lookup_pointer, HttpMethod, OasDocument};
use super::{detect_version, RawDocument, Version};

const JSON_MEDIA: &str = "application/json";

pub fn upconvert(doc: &RawDocument) -> Result<OasDocument, IngestError> {
    if detect_version(doc) != Version::V2 {
        return Err(IngestError::Upconvert("document is not Swagger 2.0".into()));
    }
    let (value, _notes) = upconvert_value(&doc.root)?;
    OasDocument::from_value(value)
}

/// Convert a 2.0 document tree. Returns the 3.0 tree plus informational notes.
pub fn upconvert_value(root: &Value) -> Result<(Value, Vec<String>), IngestError> {
    let top = root
        .as_object()
        .ok_or_else(|| IngestError::Upconvert("top level is not a mapping".into()))?;
    let mut notes = Vec::new();
    let mut out = Map::new();
    out.insert("openapi".into(), json!("3.0.0"));
    if let Some(info) = top.get("info") {
        out.insert("info".into(), info.clone());
    }
    out.insert("servers".into(), json!(servers(top, &mut notes)));

    let consumes = media_list(top.get("consumes"));
    let produces = media_list(top.get("produces"));

    let mut paths_out = Map::new();
    if let Some(paths) = top.get("paths") {
        let paths = paths
            .as_object()
            .ok_or_else(|| IngestError::Upconvert("paths is not a mapping".into()))?;
        for (path, item) in paths {
            let item_ptr = format!("/paths/{}", escape_pointer_token(path));
            let item = item
                .as_object()
                .ok_or_else(|| IngestError::Upconvert(format!("{item_ptr} is not a mapping")))?;
            let shared = param_list(root, item.get("parameters"), &item_ptr)?;
            let mut item_out = Map::new();
            for (key, op) in item {
                if key.starts_with("x-") {
                    item_out.insert(key.clone(), op.clone());
                    continue;
                }
                if HttpMethod::from_lower(key).is_none() {
                    continue;
                }
                let op_ptr = format!("{item_ptr}/{key}");
                let op = op
                    .as_object()
                    .ok_or_else(|| IngestError::Upconvert(format!("{op_ptr} is not a mapping")))?;
                let op_out = convert_operation(root, op, &shared, &consumes, &produces, &op_ptr)?;
                item_out.insert(key.clone(), Value::Object(op_out));
            }
            paths_out.insert(path.clone(), Value::Object(item_out));
        }
    }
    out.insert("paths".into(), Value::Object(paths_out));

    let mut components = Map::new();
    if let Some(definitions) = top.get("definitions") {
        if !definitions.is_object() {
            return Err(IngestError::Upconvert("definitions is not a mapping".into()));
        }
        components.insert("schemas".into(), definitions.clone());
    }
    if let Some(defs) = top.get("securityDefinitions") {
        let defs = defs
            .as_object()
            .ok_or_else(|| IngestError::Upconvert("securityDefinitions is not a mapping".into()))?;
        let mut schemes = Map::new();
        for (name, def) in defs {
            schemes.insert(name.clone(), convert_security_definition(name, def)?);
        }
        components.insert("securitySchemes".into(), Value::Object(schemes));
    }
    out.insert("components".into(), Value::Object(components));

    for key in ["security", "tags", "externalDocs"] {
        if let Some(value) = top.get(key) {
            out.insert(key.into(), value.clone());
        }
    }
    for (key, value) in top {
        if key.starts_with("x-") {
            out.insert(key.clone(), value.clone());
        }
    }

    let mut converted = Value::Object(out);
    rewrite_refs(&mut converted);
    Ok((converted, notes))
}

fn servers(top: &Map<String, Value>, notes: &mut Vec<String>) -> Vec<Value> {
    let base_path = top
        .get("basePath")
        .and_then(Value::as_str)
        .unwrap_or("")
        .trim_end_matches('/')
        .to_string();
    let Some(host) = top.get("host").and_then(Value::as_str) else {
        let url = if base_path.is_empty() { "/".to_string() } else { base_path };
        return vec![json!({ "url": url })];
    };
    let schemes: Vec<&str> = top
        .get("schemes")
        .and_then(Value::as_array)
        .map(|s| s.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let scheme = schemes.first().copied().unwrap_or("https");
    if schemes.len() > 1 {
        notes.push(format!(
            "schemes {:?} listed; using {scheme} for the server URL",
            schemes
        ));
    }
    vec![json!({ "url": format!("{scheme}://{host}{base_path}") })]
}

fn media_list(value: Option<&Value>) -> Vec<String> {
    value
        .and_then(Value::as_array)
        .map(|list| list.iter().filter_map(Value::as_str).map(str::to_string).collect())
        .unwrap_or_default()
}

fn deref_local<'a>(root: &'a Value, value: &'a Value) -> Result<&'a Value, IngestError> {
    match value.get("$ref").and_then(Value::as_str) {
        Some(pointer) => lookup_pointer(root, pointer),
        None => Ok(value),
    }
}

fn param_list<'a>(
    root: &'a Value,
    value: Option<&'a Value>,
    owner_ptr: &str,
) -> Result<Vec<&'a Map<String, Value>>, IngestError> {
    let Some(value) = value else {
        return Ok(Vec::new());
    };
    let list = value
        .as_array()
        .ok_or_else(|| IngestError::Upconvert(format!("{owner_ptr}/parameters is not a list")))?;
    list.iter()
        .enumerate()
        .map(|(i, p)| {
            deref_local(root, p)?
                .as_object()
                .ok_or_else(|| IngestError::Upconvert(format!("{owner_ptr}/parameters/{i} is not a mapping")))
        })
        .collect()
}

fn param_key(param: &Map<String, Value>) -> (Option<&str>, Option<&str>) {
    (
        param.get("name").and_then(Value::as_str),
        param.get("in").and_then(Value::as_str),
    )
}

/// Keywords a 2.0 non-body parameter carries that belong in a 3.0 schema.
const SCHEMA_KEYWORDS: [&str; 15] = [
    "type",
    "format",
    "items",
    "enum",
    "default",
    "maximum",
    "minimum",
    "exclusiveMaximum",
    "exclusiveMinimum",
    "maxLength",
    "minLength",
    "pattern",
    "maxItems",
    "minItems",
    "uniqueItems",
];

fn param_schema(param: &Map<String, Value>) -> Value {
    let mut schema = Map::new();
    for key in SCHEMA_KEYWORDS {
        if let Some(value) = param.get(key) {
            schema.insert(key.into(), value.clone());
        }
    }
    Value::Object(schema)
}

fn convert_operation(
    root: &Value,
    op: &Map<String, Value>,
    shared: &[&Map<String, Value>],
    global_consumes: &[String],
    global_produces: &[String],
    op_ptr: &str,
) -> Result<Map<String, Value>, IngestError> {
    let mut out = Map::new();
    for key in ["operationId", "summary", "description", "tags", "deprecated", "security", "externalDocs"] {
        if let Some(value) = op.get(key) {
            out.insert(key.into(), value.clone());
        }
    }
    for (key, value) in op {
        if key.starts_with("x-") {
            out.insert(key.clone(), value.clone());
        }
    }
    let consumes = match op.get("consumes") {
        Some(c) => media_list(Some(c)),
        None => global_consumes.to_vec(),
    };
    let produces = match op.get("produces") {
        Some(p) => media_list(Some(p)),
        None => global_produces.to_vec(),
    };

    let own = param_list(root, op.get("parameters"), op_ptr)?;
    let mut params: Vec<&Map<String, Value>> = shared
        .iter()
        .copied()
        .filter(|p| !own.iter().any(|o| param_key(o) == param_key(p)))
        .collect();
    params.extend(own);

    let mut parameters = Vec::new();
    let mut body: Option<Value> = None;
    let mut form_props = Map::new();
    let mut form_required = Vec::new();
    for (index, param) in params.iter().enumerate() {
        let location = param
            .get("in")
            .and_then(Value::as_str)
            .ok_or_else(|| IngestError::Upconvert(format!("{op_ptr}: parameter {index} has no 'in'")))?;
        let name = param
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| IngestError::Upconvert(format!("{op_ptr}: parameter {index} has no name")))?;
        let required = param.get("required").and_then(Value::as_bool).unwrap_or(false);
        match location {
            "body" => {
                let schema = param.get("schema").cloned().ok_or_else(|| {
                    IngestError::Upconvert(format!("{op_ptr}: body parameter {name} has no schema"))
                })?;
                let media = if consumes.is_empty() {
                    vec![JSON_MEDIA.to_string()]
                } else {
                    consumes.clone()
                };
                let content: Map<String, Value> = media
                    .into_iter()
                    .map(|m| (m, json!({ "schema": schema })))
                    .collect();
                let mut request = Map::new();
                if let Some(d) = param.get("description") {
                    request.insert("description".into(), d.clone());
                }
                request.insert("content".into(), Value::Object(content));
                request.insert("required".into(), json!(required));
                body = Some(Value::Object(request));
            }
            "formData" => {
                let mut schema = param_schema(param);
                if let (Some(d), Some(map)) = (param.get("description"), schema.as_object_mut()) {
                    map.insert("description".into(), d.clone());
                }
                form_props.insert(name.to_string(), schema);
                if required {
                    form_required.push(json!(name));
                }
            }
            "path" | "query" | "header" => {
                let mut converted = Map::new();
                converted.insert("name".into(), json!(name));
                converted.insert("in".into(), json!(location));
                if let Some(d) = param.get("description") {
                    converted.insert("description".into(), d.clone());
                }
                converted.insert("required".into(), json!(required || location == "path"));
                converted.insert("schema".into(), param_schema(param));
                parameters.push(Value::Object(converted));
            }
            other => {
                return Err(IngestError::Upconvert(format!(
                    "{op_ptr}: parameter {name} has unsupported location {other:?}"
                )))
            }
        }
    }
    if !form_props.is_empty() {
        if body.is_some() {
            return Err(IngestError::Upconvert(format!(
                "{op_ptr}: both body and formData parameters present"
            )));
        }
        let media = if consumes.iter().any(|c| c == "multipart/form-data") {
            "multipart/form-data"
        } else {
            "application/x-www-form-urlencoded"
        };
        let mut schema = Map::new();
        schema.insert("type".into(), json!("object"));
        schema.insert("properties".into(), Value::Object(form_props));
        if !form_required.is_empty() {
            schema.insert("required".into(), Value::Array(form_required.clone()));
        }
        body = Some(json!({
            "content": { media: { "schema": Value::Object(schema) } },
            "required": !form_required.is_empty()
        }));
    }
    if !parameters.is_empty() {
        out.insert("parameters".into(), Value::Array(parameters));
    }
    if let Some(body) = body {
        out.insert("requestBody".into(), body);
    }

    let mut responses = Map::new();
    if let Some(resp) = op.get("responses") {
        let resp = resp
            .as_object()
            .ok_or_else(|| IngestError::Upconvert(format!("{op_ptr}/responses is not a mapping")))?;
        for (code, response) in resp {
            if code.starts_with("x-") {
                continue;
            }
            let response = deref_local(root, response)?
                .as_object()
                .ok_or_else(|| IngestError::Upconvert(format!("{op_ptr}/responses/{code} is not a mapping")))?;
            let mut converted = Map::new();
            converted.insert(
                "description".into(),
                response.get("description").cloned().unwrap_or_else(|| json!("")),
            );
            if let Some(schema) = response.get("schema") {
                let media = if produces.is_empty() {
                    vec![JSON_MEDIA.to_string()]
                } else {
                    produces.clone()
                };
                let content: Map<String, Value> = media
                    .into_iter()
                    .map(|m| (m, json!({ "schema": schema })))
                    .collect();
                converted.insert("content".into(), Value::Object(content));
            }
            responses.insert(code.clone(), Value::Object(converted));
        }
    }
    out.insert("responses".into(), Value::Object(responses));
    Ok(out)
}

fn convert_security_definition(name: &str, def: &Value) -> Result<Value, IngestError> {
    let kind = def.get("type").and_then(Value::as_str).unwrap_or("");
    let mut out = match kind {
        "basic" => json!({ "type": "http", "scheme": "basic" }),
        "apiKey" => json!({
            "type": "apiKey",
            "name": def.get("name").cloned().unwrap_or_else(|| json!(name)),
            "in": def.get("in").cloned().unwrap_or_else(|| json!("header")),
        }),
        "oauth2" => {
            let scopes = def.get("scopes").cloned().unwrap_or_else(|| json!({}));
            let mut flow = Map::new();
            for key in ["authorizationUrl", "tokenUrl"] {
                if let Some(v) = def.get(key) {
                    flow.insert(key.into(), v.clone());
                }
            }
            flow.insert("scopes".into(), scopes);
            let flow_name = match def.get("flow").and_then(Value::as_str) {
                Some("implicit") => "implicit",
                Some("password") => "password",
                Some("application") => "clientCredentials",
                Some("accessCode") => "authorizationCode",
                _ => "implicit",
            };
            json!({ "type": "oauth2", "flows": { flow_name: Value::Object(flow) } })
        }
        other => {
            return Err(IngestError::Upconvert(format!(
                "security definition {name} has unsupported type {other:?}"
            )))
        }
    };
    if let (Some(d), Some(map)) = (def.get("description"), out.as_object_mut()) {
        map.insert("description".into(), d.clone());
    }
    Ok(out)
}

fn rewrite_refs(value: &mut Value) {
    match value {
        Value::Object(map) => {
            for (key, child) in map.iter_mut() {
                if key == "$ref" {
                    if let Value::String(pointer) = child {
                        if let Some(rest) = pointer.strip_prefix("#/definitions/") {
                            *pointer = format!("#/components/schemas/{rest}");
                        }
                    }
                } else {
                    rewrite_refs(child);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(rewrite_refs),
        _ => {}
    }
}
