use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HttpMethod {
    Get,
    Put,
    Post,
    Delete,
    Options,
    Head,
    Patch,
    Trace,
}

impl HttpMethod {
    pub const ALL: [HttpMethod; 8] = [
        HttpMethod::Get,
        HttpMethod::Put,
        HttpMethod::Post,
        HttpMethod::Delete,
        HttpMethod::Options,
        HttpMethod::Head,
        HttpMethod::Patch,
        HttpMethod::Trace,
    ];

    pub fn as_lower(&self) -> &'static str {
        match self {
            HttpMethod::Get => "get",
            HttpMethod::Put => "put",
            HttpMethod::Post => "post",
            HttpMethod::Delete => "delete",
            HttpMethod::Options => "options",
            HttpMethod::Head => "head",
            HttpMethod::Patch => "patch",
            HttpMethod::Trace => "trace",
        }
    }

    pub fn from_lower(text: &str) -> Option<HttpMethod> {
        HttpMethod::ALL.into_iter().find(|m| m.as_lower() == text)
    }

    pub fn accepts_body(&self) -> bool {
        matches!(self, HttpMethod::Post | HttpMethod::Put | HttpMethod::Patch | HttpMethod::Delete)
    }
}

impl fmt::Display for HttpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_lower().to_ascii_uppercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaType {
    Object,
    Array,
    String,
    Number,
    Integer,
    Boolean,
    /// Anything else, kept verbatim (`file`, `null`, a type list, ...).
    Other(String),
}

impl SchemaType {
    fn from_value(value: &Value) -> SchemaType {
        match value.as_str() {
            Some("object") => SchemaType::Object,
            Some("array") => SchemaType::Array,
            Some("string") => SchemaType::String,
            Some("number") => SchemaType::Number,
            Some("integer") => SchemaType::Integer,
            Some("boolean") => SchemaType::Boolean,
            Some(other) => SchemaType::Other(other.to_string()),
            None => SchemaType::Other(value.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            SchemaType::Object => "object",
            SchemaType::Array => "array",
            SchemaType::String => "string",
            SchemaType::Number => "number",
            SchemaType::Integer => "integer",
            SchemaType::Boolean => "boolean",
            SchemaType::Other(text) => text,
        }
    }
}

/// A JSON-Schema-like schema object. References are kept unresolved; use
/// [`OasDocument::resolve_ref`] to follow them.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SchemaObject {
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub schema_type: Option<SchemaType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "IndexMap::is_empty")]
    pub properties: IndexMap<String, SchemaObject>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<Box<SchemaObject>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub required: Vec<String>,
    #[serde(rename = "enum", skip_serializing_if = "Vec::is_empty")]
    pub enum_values: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(rename = "$ref", skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(rename = "allOf", skip_serializing_if = "Vec::is_empty")]
    pub all_of: Vec<SchemaObject>,
    #[serde(rename = "oneOf", skip_serializing_if = "Vec::is_empty")]
    pub one_of: Vec<SchemaObject>,
    #[serde(rename = "anyOf", skip_serializing_if = "Vec::is_empty")]
    pub any_of: Vec<SchemaObject>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default: Option<Value>,
}

impl SchemaObject {
    pub fn of_type(schema_type: SchemaType) -> SchemaObject {
        SchemaObject {
            schema_type: Some(schema_type),
            ..SchemaObject::default()
        }
    }

    pub fn reference(pointer: impl Into<String>) -> SchemaObject {
        SchemaObject {
            reference: Some(pointer.into()),
            ..SchemaObject::default()
        }
    }

    pub fn from_value(value: &Value) -> SchemaObject {
        let Some(map) = value.as_object() else {
            return SchemaObject::default();
        };
        let children = |key: &str| -> Vec<SchemaObject> {
            map.get(key)
                .and_then(Value::as_array)
                .map(|items| items.iter().map(SchemaObject::from_value).collect())
                .unwrap_or_default()
        };
        SchemaObject {
            schema_type: map.get("type").map(SchemaType::from_value),
            format: str_field(map, "format"),
            properties: map
                .get("properties")
                .and_then(Value::as_object)
                .map(|props| {
                    props
                        .iter()
                        .map(|(k, v)| (k.clone(), SchemaObject::from_value(v)))
                        .collect()
                })
                .unwrap_or_default(),
            items: match map.get("items") {
                Some(Value::Array(list)) => list.first().map(|v| Box::new(SchemaObject::from_value(v))),
                Some(v) => Some(Box::new(SchemaObject::from_value(v))),
                None => None,
            },
            required: map
                .get("required")
                .and_then(Value::as_array)
                .map(|r| r.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
                .unwrap_or_default(),
            enum_values: map
                .get("enum")
                .and_then(Value::as_array)
                .cloned()
                .unwrap_or_default(),
            title: str_field(map, "title"),
            description: str_field(map, "description"),
            reference: str_field(map, "$ref"),
            all_of: children("allOf"),
            one_of: children("oneOf"),
            any_of: children("anyOf"),
            default: map.get("default").cloned(),
        }
    }

    pub fn is_required(&self, property: &str) -> bool {
        self.required.iter().any(|r| r == property)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamLocation {
    Path,
    Query,
    Header,
    Cookie,
    Other(String),
}

impl ParamLocation {
    fn parse(text: &str) -> ParamLocation {
        match text {
            "path" => ParamLocation::Path,
            "query" => ParamLocation::Query,
            "header" => ParamLocation::Header,
            "cookie" => ParamLocation::Cookie,
            other => ParamLocation::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            ParamLocation::Path => "path",
            ParamLocation::Query => "query",
            ParamLocation::Header => "header",
            ParamLocation::Cookie => "cookie",
            ParamLocation::Other(text) => text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameter {
    pub name: String,
    pub location: ParamLocation,
    pub schema: Option<SchemaObject>,
    pub required: bool,
    pub default: Option<Value>,
    pub description: Option<String>,
    pub style: Option<String>,
    pub pointer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediaSchema {
    pub schema: Option<SchemaObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequestBody {
    pub required: bool,
    pub description: Option<String>,
    pub content: IndexMap<String, MediaSchema>,
    pub pointer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Response {
    pub description: Option<String>,
    pub content: IndexMap<String, MediaSchema>,
    pub links: IndexMap<String, LinkDefinition>,
    pub pointer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LinkTarget {
    OperationId(String),
    OperationRef { method: HttpMethod, path: String },
    /// An `operationRef` that does not point into this document's paths.
    Unresolvable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkDefinition {
    pub name: String,
    pub target: LinkTarget,
    /// Target parameter name to runtime expression text.
    pub parameters: IndexMap<String, String>,
    pub description: Option<String>,
    pub pointer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SecuritySchemeKind {
    ApiKey { name: String, location: ParamLocation },
    Basic,
    /// HTTP bearer, OAuth 2 and OpenID Connect: a token taken from the context.
    Bearer,
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecurityScheme {
    pub name: String,
    pub kind: SecuritySchemeKind,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OasOperation {
    pub operation_id: Option<String>,
    pub method: HttpMethod,
    pub path: String,
    pub summary: Option<String>,
    pub description: Option<String>,
    pub parameters: Vec<Parameter>,
    pub request_body: Option<RequestBody>,
    pub responses: IndexMap<String, Response>,
    /// Effective security scheme names (operation-level, else document-level).
    pub security: Vec<String>,
    pub pointer: String,
}

impl OasOperation {
    /// `{name}` segments of the path template, in order.
    pub fn path_template_params(&self) -> Vec<String> {
        path_template_params(&self.path)
    }
}

pub(crate) fn path_template_params(path: &str) -> Vec<String> {
    let mut names = Vec::new();
    let mut rest = path;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                names.push(after[..end].to_string());
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    names
}

#[derive(Debug, Default)]
pub struct Components {
    pub schemas: IndexMap<String, Arc<SchemaObject>>,
    pub security_schemes: IndexMap<String, SecurityScheme>,
}

/// Normalized OpenAPI 3.x document.
#[derive(Debug)]
pub struct OasDocument {
    pub version: String,
    pub title: Option<String>,
    pub description: Option<String>,
    pub servers: Vec<String>,
    pub operations: Vec<OasOperation>,
    pub components: Components,
    /// The normalized document tree; references are resolved against it.
    pub root: Value,
    pub(crate) ref_cache: Mutex<HashMap<String, Arc<SchemaObject>>>,
}

pub(crate) fn escape_pointer_token(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn str_field(map: &Map<String, Value>, key: &str) -> Option<String> {
    map.get(key).and_then(Value::as_str).map(str::to_string)
}

/// Follow `$ref` chains for non-schema components (parameters, responses,
/// request bodies, links).
fn deref<'a>(root: &'a Value, mut value: &'a Value) -> Result<&'a Value, IngestError> {
    for _ in 0..32 {
        let Some(pointer) = value.get("$ref").and_then(Value::as_str) else {
            return Ok(value);
        };
        value = lookup_pointer(root, pointer)?;
    }
    Err(IngestError::MissingRef {
        pointer: value.get("$ref").and_then(Value::as_str).unwrap_or("").to_string(),
        reason: "reference chain too long".into(),
    })
}

pub(crate) fn lookup_pointer<'a>(root: &'a Value, pointer: &str) -> Result<&'a Value, IngestError> {
    let Some(local) = pointer.strip_prefix('#') else {
        return Err(IngestError::MissingRef {
            pointer: pointer.to_string(),
            reason: "refers to a relative or external document".into(),
        });
    };
    if !local.is_empty() && !local.starts_with('/') {
        return Err(IngestError::MissingRef {
            pointer: pointer.to_string(),
            reason: "not a JSON pointer".into(),
        });
    }
    let decoded = percent_decode(local);
    root.pointer(&decoded).ok_or_else(|| IngestError::MissingRef {
        pointer: pointer.to_string(),
        reason: "target does not exist".into(),
    })
}

fn percent_decode(text: &str) -> String {
    percent_encoding::percent_decode_str(text)
        .decode_utf8_lossy()
        .into_owned()
}

impl OasDocument {
    /// Build the model from a 3.x document tree.
    pub fn from_value(root: Value) -> Result<OasDocument, IngestError> {
        let Some(top) = root.as_object() else {
            return Err(IngestError::structure("", "top level is not a mapping"));
        };
        let version = str_field(top, "openapi").unwrap_or_default();
        let info = top.get("info").and_then(Value::as_object);
        let title = info.and_then(|i| str_field(i, "title"));
        let description = info.and_then(|i| str_field(i, "description"));
        let servers = parse_servers(top.get("servers"));

        let mut components = Components::default();
        let comps = top.get("components").and_then(Value::as_object);
        if let Some(schemas) = comps.and_then(|c| c.get("schemas")).and_then(Value::as_object) {
            for (name, value) in schemas {
                components
                    .schemas
                    .insert(name.clone(), Arc::new(SchemaObject::from_value(value)));
            }
        }
        if let Some(schemes) = comps
            .and_then(|c| c.get("securitySchemes"))
            .and_then(Value::as_object)
        {
            for (name, value) in schemes {
                let value = deref(&root, value)?;
                components
                    .security_schemes
                    .insert(name.clone(), parse_security_scheme(name, value));
            }
        }

        let global_security = parse_security(top.get("security"));
        let mut operations = Vec::new();
        if let Some(paths) = top.get("paths") {
            let paths = paths
                .as_object()
                .ok_or_else(|| IngestError::structure("/paths", "paths is not a mapping"))?;
            for (path, item) in paths {
                let item_ptr = format!("/paths/{}", escape_pointer_token(path));
                let item = deref(&root, item)?;
                let Some(item_map) = item.as_object() else {
                    return Err(IngestError::structure(item_ptr, "path item is not a mapping"));
                };
                let shared = parse_parameters(&root, item_map.get("parameters"), &item_ptr)?;
                for (key, op_value) in item_map {
                    let Some(method) = HttpMethod::from_lower(key) else {
                        continue;
                    };
                    let op_ptr = format!("{item_ptr}/{key}");
                    let Some(op_map) = op_value.as_object() else {
                        return Err(IngestError::structure(op_ptr, "operation is not a mapping"));
                    };
                    let own = parse_parameters(&root, op_map.get("parameters"), &op_ptr)?;
                    let mut parameters: Vec<Parameter> = shared
                        .iter()
                        .filter(|p| !own.iter().any(|o| o.name == p.name && o.location == p.location))
                        .cloned()
                        .collect();
                    parameters.extend(own);
                    let request_body = match op_map.get("requestBody") {
                        Some(body) => Some(parse_request_body(&root, body, &op_ptr)?),
                        None => None,
                    };
                    let responses = parse_responses(&root, op_map.get("responses"), &op_ptr)?;
                    let security = if op_map.contains_key("security") {
                        parse_security(op_map.get("security"))
                    } else {
                        global_security.clone()
                    };
                    operations.push(OasOperation {
                        operation_id: str_field(op_map, "operationId"),
                        method,
                        path: path.clone(),
                        summary: str_field(op_map, "summary"),
                        description: str_field(op_map, "description"),
                        parameters,
                        request_body,
                        responses,
                        security,
                        pointer: op_ptr,
                    });
                }
            }
        }

        let cache = components
            .schemas
            .iter()
            .map(|(name, schema)| {
                (
                    format!("#/components/schemas/{}", escape_pointer_token(name)),
                    Arc::clone(schema),
                )
            })
            .collect();

        Ok(OasDocument {
            version,
            title,
            description,
            servers,
            operations,
            components,
            root,
            ref_cache: Mutex::new(cache),
        })
    }

    pub fn operation_by_id(&self, id: &str) -> Option<usize> {
        self.operations
            .iter()
            .position(|op| op.operation_id.as_deref() == Some(id))
    }

    pub fn operation_by_route(&self, method: HttpMethod, path: &str) -> Option<usize> {
        self.operations
            .iter()
            .position(|op| op.method == method && op.path == path)
    }

    /// First server URL with variables replaced by their defaults.
    pub fn base_url(&self) -> String {
        self.servers.first().cloned().unwrap_or_else(|| "/".into())
    }
}

fn parse_servers(servers: Option<&Value>) -> Vec<String> {
    let Some(list) = servers.and_then(Value::as_array) else {
        return Vec::new();
    };
    list.iter()
        .filter_map(|server| {
            let mut url = server.get("url")?.as_str()?.to_string();
            if let Some(vars) = server.get("variables").and_then(Value::as_object) {
                for (name, var) in vars {
                    if let Some(default) = var.get("default").and_then(Value::as_str) {
                        url = url.replace(&format!("{{{name}}}"), default);
                    }
                }
            }
            Some(url)
        })
        .collect()
}

fn parse_security(value: Option<&Value>) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for requirement in value.and_then(Value::as_array).into_iter().flatten() {
        for name in requirement.as_object().into_iter().flat_map(|m| m.keys()) {
            if !names.contains(name) {
                names.push(name.clone());
            }
        }
    }
    names
}

fn parse_security_scheme(name: &str, value: &Value) -> SecurityScheme {
    let kind = match value.get("type").and_then(Value::as_str) {
        Some("apiKey") => SecuritySchemeKind::ApiKey {
            name: value.get("name").and_then(Value::as_str).unwrap_or(name).to_string(),
            location: ParamLocation::parse(value.get("in").and_then(Value::as_str).unwrap_or("header")),
        },
        Some("http") => match value
            .get("scheme")
            .and_then(Value::as_str)
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("basic") => SecuritySchemeKind::Basic,
            Some("bearer") => SecuritySchemeKind::Bearer,
            Some(other) => SecuritySchemeKind::Other(format!("http/{other}")),
            None => SecuritySchemeKind::Other("http".into()),
        },
        Some("oauth2") | Some("openIdConnect") => SecuritySchemeKind::Bearer,
        Some(other) => SecuritySchemeKind::Other(other.to_string()),
        None => SecuritySchemeKind::Other(String::new()),
    };
    SecurityScheme {
        name: name.to_string(),
        kind,
        description: value.get("description").and_then(Value::as_str).map(str::to_string),
    }
}

fn parse_parameters(
    root: &Value,
    value: Option<&Value>,
    owner_ptr: &str,
) -> Result<Vec<Parameter>, IngestError> {
    let Some(value) = value else {
        return Ok(Vec::new());
    };
    let list = value
        .as_array()
        .ok_or_else(|| IngestError::structure(format!("{owner_ptr}/parameters"), "parameters is not a list"))?;
    let mut params = Vec::with_capacity(list.len());
    for (index, raw) in list.iter().enumerate() {
        let pointer = format!("{owner_ptr}/parameters/{index}");
        let param = deref(root, raw)?;
        let map = param
            .as_object()
            .ok_or_else(|| IngestError::structure(&pointer, "parameter is not a mapping"))?;
        let name = str_field(map, "name")
            .ok_or_else(|| IngestError::structure(&pointer, "parameter has no name"))?;
        let location = str_field(map, "in")
            .map(|l| ParamLocation::parse(&l))
            .ok_or_else(|| IngestError::structure(&pointer, "parameter has no location"))?;
        let schema = match (map.get("schema"), map.get("content")) {
            (Some(schema), _) => Some(SchemaObject::from_value(schema)),
            (None, Some(content)) => content
                .as_object()
                .and_then(|c| c.values().next())
                .and_then(|media| media.get("schema"))
                .map(SchemaObject::from_value),
            (None, None) => None,
        };
        let default = map
            .get("default")
            .cloned()
            .or_else(|| schema.as_ref().and_then(|s| s.default.clone()));
        params.push(Parameter {
            required: map.get("required").and_then(Value::as_bool).unwrap_or(false)
                || location == ParamLocation::Path,
            name,
            location,
            schema,
            default,
            description: str_field(map, "description"),
            style: str_field(map, "style"),
            pointer,
        });
    }
    Ok(params)
}

fn parse_content(value: Option<&Value>) -> IndexMap<String, MediaSchema> {
    value
        .and_then(Value::as_object)
        .map(|content| {
            content
                .iter()
                .map(|(media, entry)| {
                    (
                        media.clone(),
                        MediaSchema {
                            schema: entry.get("schema").map(SchemaObject::from_value),
                        },
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}

fn parse_request_body(root: &Value, value: &Value, op_ptr: &str) -> Result<RequestBody, IngestError> {
    let pointer = format!("{op_ptr}/requestBody");
    let body = deref(root, value)?;
    let map = body
        .as_object()
        .ok_or_else(|| IngestError::structure(&pointer, "requestBody is not a mapping"))?;
    Ok(RequestBody {
        required: map.get("required").and_then(Value::as_bool).unwrap_or(false),
        description: str_field(map, "description"),
        content: parse_content(map.get("content")),
        pointer,
    })
}

fn parse_responses(
    root: &Value,
    value: Option<&Value>,
    op_ptr: &str,
) -> Result<IndexMap<String, Response>, IngestError> {
    let mut responses = IndexMap::new();
    let Some(value) = value else {
        return Ok(responses);
    };
    let map = value
        .as_object()
        .ok_or_else(|| IngestError::structure(format!("{op_ptr}/responses"), "responses is not a mapping"))?;
    for (code, raw) in map {
        if code.starts_with("x-") {
            continue;
        }
        let pointer = format!("{op_ptr}/responses/{}", escape_pointer_token(code));
        let response = deref(root, raw)?;
        let Some(resp) = response.as_object() else {
            return Err(IngestError::structure(pointer, "response is not a mapping"));
        };
        let mut links = IndexMap::new();
        if let Some(link_map) = resp.get("links").and_then(Value::as_object) {
            for (name, link) in link_map {
                let link_ptr = format!("{pointer}/links/{}", escape_pointer_token(name));
                let link = deref(root, link)?;
                links.insert(name.clone(), parse_link(name, link, link_ptr));
            }
        }
        responses.insert(
            code.clone(),
            Response {
                description: str_field(resp, "description"),
                content: parse_content(resp.get("content")),
                links,
                pointer,
            },
        );
    }
    Ok(responses)
}

fn parse_link(name: &str, value: &Value, pointer: String) -> LinkDefinition {
    let target = if let Some(id) = value.get("operationId").and_then(Value::as_str) {
        LinkTarget::OperationId(id.to_string())
    } else if let Some(reference) = value.get("operationRef").and_then(Value::as_str) {
        parse_operation_ref(reference)
    } else {
        LinkTarget::Unresolvable(String::new())
    };
    let parameters = value
        .get("parameters")
        .and_then(Value::as_object)
        .map(|params| {
            params
                .iter()
                .map(|(k, v)| {
                    let text = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                    (k.clone(), text)
                })
                .collect()
        })
        .unwrap_or_default();
    LinkDefinition {
        name: name.to_string(),
        target,
        parameters,
        description: value.get("description").and_then(Value::as_str).map(str::to_string),
        pointer,
    }
}

fn parse_operation_ref(reference: &str) -> LinkTarget {
    let unresolvable = || LinkTarget::Unresolvable(reference.to_string());
    let Some(local) = reference.strip_prefix("#/paths/") else {
        return unresolvable();
    };
    let Some((path_token, method)) = local.rsplit_once('/') else {
        return unresolvable();
    };
    let Some(method) = HttpMethod::from_lower(method) else {
        return unresolvable();
    };
    let path = path_token.replace("~1", "/").replace("~0", "~");
    LinkTarget::OperationRef { method, path }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(value: Value) -> OasDocument {
        OasDocument::from_value(value).unwrap()
    }

    #[test]
    fn operations_in_document_order_with_merged_params() {
        let d = doc(json!({
            "openapi": "3.0.0",
            "info": {"title": "t", "version": "1"},
            "servers": [{"url": "https://{host}/v1", "variables": {"host": {"default": "api.test"}}}],
            "paths": {
                "/users/{id}": {
                    "parameters": [{"name": "id", "in": "path", "schema": {"type": "string"}}],
                    "get": {"responses": {"200": {"description": "ok"}}},
                    "delete": {"security": [], "responses": {}}
                },
                "/a": {"post": {"operationId": "makeA", "responses": {}}}
            },
            "security": [{"key": []}]
        }));
        assert_eq!(d.base_url(), "https://api.test/v1");
        assert_eq!(d.operations.len(), 3);
        assert_eq!(d.operations[0].method, HttpMethod::Get);
        assert_eq!(d.operations[0].parameters[0].name, "id");
        assert!(d.operations[0].parameters[0].required);
        assert_eq!(d.operations[0].security, vec!["key".to_string()]);
        assert!(d.operations[1].security.is_empty());
        assert_eq!(d.operation_by_id("makeA"), Some(2));
        assert_eq!(d.operations[0].pointer, "/paths/~1users~1{id}/get");
    }

    #[test]
    fn links_and_operation_refs() {
        let d = doc(json!({
            "openapi": "3.0.0",
            "info": {"title": "t", "version": "1"},
            "paths": {"/user/{id}": {"get": {"responses": {"200": {
                "description": "ok",
                "links": {
                    "A": {"operationId": "x", "parameters": {"p": "$response.body#/a"}},
                    "B": {"operationRef": "#/paths/~1company~1{name}/get"},
                    "C": {"$ref": "#/components/links/C"}
                }
            }}}}},
            "components": {"links": {"C": {"operationId": "y"}}}
        }));
        let links = &d.operations[0].responses["200"].links;
        assert_eq!(links["A"].parameters["p"], "$response.body#/a");
        assert_eq!(
            links["B"].target,
            LinkTarget::OperationRef { method: HttpMethod::Get, path: "/company/{name}".into() }
        );
        assert_eq!(links["C"].target, LinkTarget::OperationId("y".into()));
    }

    #[test]
    fn missing_parameter_ref_is_missing_ref() {
        let err = OasDocument::from_value(json!({
            "openapi": "3.0.0",
            "paths": {"/a": {"get": {"parameters": [{"$ref": "other.yaml#/P"}]}}}
        }))
        .unwrap_err();
        assert!(matches!(err, IngestError::MissingRef { .. }));
    }

    #[test]
    fn template_params() {
        assert_eq!(path_template_params("/a/{x}/b/{y}"), vec!["x", "y"]);
        assert!(path_template_params("/a").is_empty());
    }

    #[test]
    fn security_schemes() {
        let d = doc(json!({
            "openapi": "3.0.0",
            "components": {"securitySchemes": {
                "k": {"type": "apiKey", "in": "header", "name": "X-Api-Key"},
                "b": {"type": "http", "scheme": "Basic"},
                "o": {"type": "oauth2", "flows": {}}
            }}
        }));
        let s = &d.components.security_schemes;
        assert_eq!(
            s["k"].kind,
            SecuritySchemeKind::ApiKey { name: "X-Api-Key".into(), location: ParamLocation::Header }
        );
        assert_eq!(s["b"].kind, SecuritySchemeKind::Basic);
        assert_eq!(s["o"].kind, SecuritySchemeKind::Bearer);
    }
}
