//! Shape classification of schema objects and per-operation analysis
//! (which response and request body are used, which parameters survive).

use serde::Serialize;

use crate::error::GenerateError;
use crate::ingest::{escape_pointer_token, merge_all_of, OasDocument, OasOperation, ParamLocation, SchemaObject, SchemaType};
use crate::report::{Report, WarningKind};

const STRING_FALLBACK: &str = "typed as String; values are passed through as stringified JSON";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scalar {
    String,
    Int,
    Float,
    Boolean,
}

impl Scalar {
    pub fn name(&self) -> &'static str {
        match self {
            Scalar::String => "String",
            Scalar::Int => "Int",
            Scalar::Float => "Float",
            Scalar::Boolean => "Boolean",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Object,
    Enum,
    Scalar(Scalar),
    List(SchemaObject),
    /// Under-specified schema, typed as String. Carries the warning cause.
    Fallback { kind: WarningKind, reason: String },
}

/// A schema with references followed and `allOf` flattened.
#[derive(Debug, Clone)]
pub struct Classified {
    pub shape: Shape,
    pub schema: SchemaObject,
    pub component: Option<String>,
    /// JSON pointer (without `#`) of the schema's definition.
    pub location: String,
    /// Properties whose `allOf` members disagreed on type.
    pub conflicts: Vec<String>,
}

pub(crate) fn pointer_of_ref(reference: &str) -> String {
    reference.strip_prefix('#').unwrap_or(reference).to_string()
}

pub fn classify(doc: &OasDocument, schema: &SchemaObject, location: &str) -> Result<Classified, GenerateError> {
    let resolved = doc.resolve_schema(schema)?;
    let location = resolved.pointer.as_deref().map(pointer_of_ref).unwrap_or_else(|| location.to_string());
    let (schema, conflicts) = if resolved.schema.all_of.is_empty() {
        ((*resolved.schema).clone(), Vec::new())
    } else {
        let merged = merge_all_of(doc, &resolved.schema)?;
        (merged.schema, merged.conflicts)
    };
    let shape = shape_of(&schema);
    Ok(Classified {
        shape,
        schema,
        component: resolved.component,
        location,
        conflicts,
    })
}

fn shape_of(schema: &SchemaObject) -> Shape {
    if schema.schema_type.is_none() && (!schema.one_of.is_empty() || !schema.any_of.is_empty()) {
        let keyword = if schema.one_of.is_empty() { "anyOf" } else { "oneOf" };
        return Shape::Fallback {
            kind: WarningKind::UnsupportedFeature,
            reason: format!("{keyword} cannot be expressed without unions"),
        };
    }
    if !schema.enum_values.is_empty()
        && matches!(schema.schema_type, Some(SchemaType::String) | Some(SchemaType::Boolean))
    {
        return Shape::Enum;
    }
    match &schema.schema_type {
        Some(SchemaType::Object) if schema.properties.is_empty() => Shape::Fallback {
            kind: WarningKind::InvalidSchemaType,
            reason: "object schema declares no properties".into(),
        },
        Some(SchemaType::Object) => Shape::Object,
        Some(SchemaType::Array) => match &schema.items {
            Some(items) => Shape::List((**items).clone()),
            None => Shape::Fallback {
                kind: WarningKind::InvalidSchemaType,
                reason: "array schema declares no items".into(),
            },
        },
        Some(SchemaType::String) => Shape::Scalar(Scalar::String),
        Some(SchemaType::Integer) => Shape::Scalar(Scalar::Int),
        Some(SchemaType::Number) => Shape::Scalar(Scalar::Float),
        Some(SchemaType::Boolean) => Shape::Scalar(Scalar::Boolean),
        Some(SchemaType::Other(name)) => Shape::Fallback {
            kind: WarningKind::UnknownSchemaType,
            reason: format!("unknown schema type {name:?}"),
        },
        None => Shape::Fallback {
            kind: WarningKind::InvalidSchemaType,
            reason: "schema has no type".into(),
        },
    }
}

/// Record the warnings a classification implies.
pub(crate) fn report_classified(report: &mut Report, classified: &Classified) -> Result<(), GenerateError> {
    for key in &classified.conflicts {
        report.record_warning(
            WarningKind::InvalidSchemaType,
            format!("{}/allOf", classified.location),
            format!("allOf members disagree on the type of property {key:?}"),
            format!("property {key:?} {STRING_FALLBACK}"),
        )?;
    }
    if let Shape::Fallback { kind, reason } = &classified.shape {
        report.record_warning(*kind, &classified.location, reason, STRING_FALLBACK)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseChoice {
    pub status: String,
    /// `None` when the chosen content is not JSON; the field is typed String.
    pub schema: Option<SchemaObject>,
    pub media: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyChoice {
    pub media: String,
    /// `None` when the JSON body declares no schema; the argument is typed String.
    pub schema: Option<SchemaObject>,
    pub required: bool,
    pub location: String,
}

/// What survives of one operation after analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationShape {
    pub index: usize,
    pub response: ResponseChoice,
    pub body: Option<BodyChoice>,
    /// Indices into the operation's parameters that become arguments.
    pub params: Vec<usize>,
}

fn success_rank(code: &str) -> Option<u32> {
    match code.parse::<u32>() {
        Ok(n) if (200..300).contains(&n) => Some(n),
        Ok(_) => None,
        Err(_) if code.eq_ignore_ascii_case("2xx") => Some(300),
        Err(_) => None,
    }
}

fn is_json(media: &str) -> bool {
    let media = media.to_ascii_lowercase();
    media.starts_with("application/") && media.contains("json")
}

fn pick_media<'a, T>(content: impl Iterator<Item = (&'a String, T)> + Clone) -> Option<(&'a String, T)> {
    content
        .clone()
        .find(|(media, _)| media.eq_ignore_ascii_case("application/json"))
        .or_else(|| content.clone().find(|(media, _)| is_json(media)))
}

fn default_style(location: &ParamLocation) -> &'static str {
    match location {
        ParamLocation::Query | ParamLocation::Cookie => "form",
        _ => "simple",
    }
}

/// Choose the response and request body of an operation and filter its
/// parameters. Returns `None` when the operation has to be skipped.
pub fn analyze_operation(
    doc: &OasDocument,
    index: usize,
    report: &mut Report,
) -> Result<Option<OperationShape>, GenerateError> {
    let op: &OasOperation = &doc.operations[index];
    let responses_ptr = format!("{}/responses", op.pointer);

    let mut candidates: Vec<(u32, &String)> = op
        .responses
        .iter()
        .filter(|(_, response)| response.content.values().any(|m| m.schema.is_some()))
        .filter_map(|(code, _)| success_rank(code).map(|rank| (rank, code)))
        .collect();
    candidates.sort();
    let Some(&(_, status)) = candidates.first() else {
        report.record_warning(
            WarningKind::MissingResponseSchema,
            &responses_ptr,
            format!("{} {} has no success response with a schema", op.method, op.path),
            "operation skipped",
        )?;
        return Ok(None);
    };
    if candidates.len() > 1 {
        let codes: Vec<&str> = candidates.iter().map(|(_, c)| c.as_str()).collect();
        report.record_warning(
            WarningKind::MultipleResponses,
            &responses_ptr,
            format!("several success responses carry schemas: {}", codes.join(", ")),
            format!("using the lowest status code {status}"),
        )?;
    }

    let response = &op.responses[status];
    let with_schema = response
        .content
        .iter()
        .filter_map(|(media, m)| m.schema.as_ref().map(|s| (media, s)));
    let response = match pick_media(with_schema.clone()) {
        Some((media, schema)) => ResponseChoice {
            status: status.clone(),
            schema: Some(schema.clone()),
            media: media.clone(),
            location: format!("{}/content/{}/schema", response.pointer, escape_pointer_token(media)),
        },
        None => {
            let (media, _) = with_schema.clone().next().expect("candidate has a schema");
            let location = format!("{}/content/{}", response.pointer, escape_pointer_token(media));
            report.record_warning(
                WarningKind::InvalidSchemaType,
                &location,
                format!("response content {media} is not JSON"),
                "typed as String; the raw response text is passed through",
            )?;
            ResponseChoice {
                status: status.clone(),
                schema: None,
                media: media.clone(),
                location,
            }
        }
    };

    let body = match &op.request_body {
        Some(body) if !body.content.is_empty() => match pick_media(body.content.iter()) {
            Some((media, m)) => {
                let location = format!("{}/content/{}/schema", body.pointer, escape_pointer_token(media));
                if m.schema.is_none() {
                    report.record_warning(
                        WarningKind::InvalidSchemaType,
                        &location,
                        "request body declares no schema",
                        "payload argument typed as String and sent as JSON text",
                    )?;
                }
                Some(BodyChoice {
                    media: media.clone(),
                    schema: m.schema.clone(),
                    required: body.required,
                    location,
                })
            }
            None => {
                let media: Vec<&str> = body.content.keys().map(String::as_str).collect();
                report.record_warning(
                    WarningKind::UnsupportedFeature,
                    &body.pointer,
                    format!("request body media types {} are not JSON", media.join(", ")),
                    "no payload argument is generated",
                )?;
                None
            }
        },
        _ => None,
    };

    let mut params = Vec::with_capacity(op.parameters.len());
    for (i, param) in op.parameters.iter().enumerate() {
        match &param.location {
            ParamLocation::Path | ParamLocation::Query | ParamLocation::Header => {}
            other => {
                report.record_warning(
                    WarningKind::UnsupportedFeature,
                    &param.pointer,
                    format!("{} parameter {:?} is not supported", other.as_str(), param.name),
                    "parameter ignored",
                )?;
                continue;
            }
        }
        if let Some(style) = &param.style {
            if style != default_style(&param.location) {
                report.record_warning(
                    WarningKind::UnsupportedFeature,
                    &param.pointer,
                    format!("serialization style {style:?} is not supported"),
                    "parameter serialized with the default style",
                )?;
            }
        }
        params.push(i);
    }

    Ok(Some(OperationShape {
        index,
        response,
        body,
        params,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Mode;
    use serde_json::json;

    fn doc(paths: serde_json::Value) -> OasDocument {
        OasDocument::from_value(json!({
            "openapi": "3.0.0",
            "info": {"title": "t", "version": "1"},
            "paths": paths,
            "components": {"schemas": {"File": {"type": "file"}}}
        }))
        .unwrap()
    }

    fn json_response(schema: serde_json::Value) -> serde_json::Value {
        json!({"description": "ok", "content": {"application/json": {"schema": schema}}})
    }

    #[test]
    fn classifies_scalars_and_fallbacks() {
        let d = doc(json!({}));
        let shape = |v: serde_json::Value| classify(&d, &SchemaObject::from_value(&v), "/x").unwrap().shape;
        assert_eq!(shape(json!({"type": "integer"})), Shape::Scalar(Scalar::Int));
        assert_eq!(shape(json!({"type": "string", "enum": ["a"]})), Shape::Enum);
        assert_eq!(shape(json!({"type": "integer", "enum": [1]})), Shape::Scalar(Scalar::Int));
        assert!(matches!(shape(json!({})), Shape::Fallback { kind: WarningKind::InvalidSchemaType, .. }));
        assert!(matches!(
            shape(json!({"type": "object"})),
            Shape::Fallback { kind: WarningKind::InvalidSchemaType, .. }
        ));
        assert!(matches!(
            shape(json!({"oneOf": [{"type": "string"}]})),
            Shape::Fallback { kind: WarningKind::UnsupportedFeature, .. }
        ));
        let file = classify(&d, &SchemaObject::reference("#/components/schemas/File"), "/x").unwrap();
        assert!(matches!(file.shape, Shape::Fallback { kind: WarningKind::UnknownSchemaType, .. }));
        assert_eq!(file.location, "/components/schemas/File");
        assert_eq!(file.component.as_deref(), Some("File"));
    }

    #[test]
    fn lowest_success_code_wins() {
        let d = doc(json!({"/a": {"get": {"responses": {
            "202": json_response(json!({"type": "integer"})),
            "200": json_response(json!({"type": "string"})),
            "2XX": json_response(json!({"type": "boolean"})),
            "404": json_response(json!({"type": "string"}))
        }}}}));
        let mut report = Report::new("t", Mode::NonStrict);
        let shape = analyze_operation(&d, 0, &mut report).unwrap().unwrap();
        assert_eq!(shape.response.status, "200");
        assert_eq!(report.count(WarningKind::MultipleResponses), 1);
    }

    #[test]
    fn missing_response_schema_skips() {
        let d = doc(json!({"/a": {"delete": {"responses": {"204": {"description": "gone"}}}}}));
        let mut report = Report::new("t", Mode::NonStrict);
        assert!(analyze_operation(&d, 0, &mut report).unwrap().is_none());
        assert_eq!(report.warnings[0].location, "/paths/~1a/delete/responses");
        let mut strict = Report::new("t", Mode::Strict);
        assert!(analyze_operation(&d, 0, &mut strict).is_err());
    }

    #[test]
    fn non_json_content_and_cookie_params() {
        let d = doc(json!({"/a": {"post": {
            "parameters": [
                {"name": "s", "in": "cookie", "schema": {"type": "string"}},
                {"name": "q", "in": "query", "schema": {"type": "string"}}
            ],
            "requestBody": {"content": {"text/plain": {"schema": {"type": "string"}}}},
            "responses": {"200": {"description": "ok", "content": {"text/csv": {"schema": {"type": "string"}}}}}
        }}}));
        let mut report = Report::new("t", Mode::NonStrict);
        let shape = analyze_operation(&d, 0, &mut report).unwrap().unwrap();
        assert!(shape.response.schema.is_none());
        assert!(shape.body.is_none());
        assert_eq!(shape.params, vec![1]);
        assert_eq!(report.count(WarningKind::InvalidSchemaType), 1);
        assert_eq!(report.count(WarningKind::UnsupportedFeature), 2);
    }

    #[test]
    fn json_variants_are_accepted() {
        let d = doc(json!({"/a": {"get": {"responses": {"200": {"description": "ok", "content": {
            "text/html": {"schema": {"type": "string"}},
            "application/hal+json": {"schema": {"type": "integer"}}
        }}}}}}));
        let mut report = Report::new("t", Mode::NonStrict);
        let shape = analyze_operation(&d, 0, &mut report).unwrap().unwrap();
        assert_eq!(shape.response.media, "application/hal+json");
        assert!(report.warnings.is_empty());
    }
}
