//! Design-time resolve plans: everything about an operation that does not
//! depend on the query being executed.

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;

use crate::error::GenerateError;
use crate::ingest::{HttpMethod, OasDocument, ParamLocation, SecuritySchemeKind};
use crate::preprocess::{lower_first, sanitize, Direction, OperationShape, TypesDictionary};
use crate::schema::{type_ref_for, InputValue, TypeRef};

use super::link_expr::LinkExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamIn {
    Path,
    Query,
    Header,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamBinding {
    pub arg: String,
    pub location: ParamIn,
    /// Name used upstream.
    pub raw_name: String,
    pub required: bool,
    pub default: Option<Value>,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    /// Sanitation scope of an input object argument.
    pub scope: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayloadBinding {
    pub arg: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    pub media: String,
    pub required: bool,
    pub scope: Option<String>,
    /// The body has no schema; the argument is JSON text.
    pub text: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseBinding {
    pub status: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    /// Sanitation scope of the response type (looking through lists).
    pub scope: Option<String>,
    /// Whether the chosen content type is JSON.
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvePlan {
    pub operation_index: usize,
    pub operation_id: Option<String>,
    pub method: HttpMethod,
    pub path: String,
    pub base_url: String,
    /// Argument name to parameter binding.
    pub params: IndexMap<String, ParamBinding>,
    pub payload: Option<PayloadBinding>,
    pub security: Vec<String>,
    pub response: ResponseBinding,
    /// Link field name to index into the schema's link bindings.
    pub link_bindings: IndexMap<String, usize>,
    pub token_path: Option<String>,
    pub arg_scope: String,
}

impl ResolvePlan {
    pub fn param_by_raw(&self, raw: &str) -> Option<&ParamBinding> {
        self.params.values().find(|p| p.raw_name == raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkBinding {
    pub link_name: String,
    pub owner_type: String,
    pub field_name: String,
    pub source_plan: usize,
    pub target_plan: usize,
    /// Raw target parameter name to expression.
    pub expressions: IndexMap<String, LinkExpr>,
    pub pointer: String,
}

pub(crate) fn arg_scope(index: usize) -> String {
    format!("op:{index}")
}

/// Bind an operation's design-time information and build its arguments.
pub fn make_resolve_plan(
    doc: &OasDocument,
    shape: &OperationShape,
    dict: &mut TypesDictionary,
    token_path: Option<&str>,
) -> Result<(ResolvePlan, Vec<InputValue>), GenerateError> {
    let op = &doc.operations[shape.index];
    let scope = arg_scope(shape.index);
    let mut params = IndexMap::new();
    let mut args = Vec::new();

    for &i in &shape.params {
        let param = &op.parameters[i];
        let location = match param.location {
            ParamLocation::Path => ParamIn::Path,
            ParamLocation::Query => ParamIn::Query,
            ParamLocation::Header => ParamIn::Header,
            _ => continue,
        };
        let (ty, child) = match &param.schema {
            Some(schema) => type_ref_for(doc, dict, schema, Direction::Input)?,
            None => (TypeRef::named("String"), None),
        };
        let ty = if param.required { ty.non_null() } else { ty };
        let clean = sanitize(&param.name, dict.casing).map_err(|e| GenerateError::from(e).at(&param.pointer))?;
        let raw_key = if dict.sanitation.forward(&scope, &param.name).is_some() {
            format!("{}@{}", param.name, param.location.as_str())
        } else {
            param.name.clone()
        };
        let arg = dict.sanitation.register_mapping(&scope, &raw_key, &clean);
        if let Some(child) = &child {
            dict.sanitation.set_child(&scope, &raw_key, child);
        }
        args.push(InputValue {
            name: arg.clone(),
            ty: ty.clone(),
            description: param.description.clone(),
        });
        params.insert(
            arg.clone(),
            ParamBinding {
                arg,
                location,
                raw_name: param.name.clone(),
                required: param.required,
                default: param.default.clone(),
                ty,
                scope: child,
            },
        );
    }

    let payload = match &shape.body {
        Some(body) => {
            let (ty, child) = match &body.schema {
                Some(schema) => type_ref_for(doc, dict, schema, Direction::Input)?,
                None => (TypeRef::named("String"), None),
            };
            let base = match (&ty, &child) {
                (TypeRef::Named(name), Some(_)) => lower_first(name),
                _ => "requestBody".to_string(),
            };
            let arg = dict.sanitation.register_mapping(&scope, "@body", &base);
            if let Some(child) = &child {
                dict.sanitation.set_child(&scope, "@body", child);
            }
            let ty = if body.required { ty.non_null() } else { ty };
            let description = op.request_body.as_ref().and_then(|b| b.description.clone());
            args.push(InputValue {
                name: arg.clone(),
                ty: ty.clone(),
                description,
            });
            Some(PayloadBinding {
                arg,
                ty,
                media: body.media.clone(),
                required: body.required,
                scope: child,
                text: body.schema.is_none(),
            })
        }
        None => None,
    };

    let (response_ty, response_scope) = match &shape.response.schema {
        Some(schema) => type_ref_for(doc, dict, schema, Direction::Output)?,
        None => (TypeRef::named("String"), None),
    };

    let uses_token = op.security.iter().any(|name| {
        matches!(
            doc.components.security_schemes.get(name).map(|s| &s.kind),
            Some(SecuritySchemeKind::Bearer)
        )
    });

    let plan = ResolvePlan {
        operation_index: shape.index,
        operation_id: op.operation_id.clone(),
        method: op.method,
        path: op.path.clone(),
        base_url: doc.base_url(),
        params,
        payload,
        security: op.security.clone(),
        response: ResponseBinding {
            status: shape.response.status.clone(),
            ty: response_ty,
            scope: response_scope,
            json: shape.response.schema.is_some(),
        },
        link_bindings: IndexMap::new(),
        token_path: if uses_token { token_path.map(str::to_string) } else { None },
        arg_scope: scope,
    };
    Ok((plan, args))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{build_types_dictionary, Casing};
    use crate::report::{Mode, Report};
    use serde_json::json;

    fn plans(value: Value) -> Vec<(ResolvePlan, Vec<InputValue>)> {
        let doc = OasDocument::from_value(value).unwrap();
        let mut report = Report::new("t", Mode::NonStrict);
        let mut dict = build_types_dictionary(&doc, &mut report, Casing::Camel).unwrap();
        let shapes: Vec<_> = dict.operations.iter().flatten().cloned().collect();
        shapes
            .iter()
            .map(|s| make_resolve_plan(&doc, s, &mut dict, Some("token")).unwrap())
            .collect()
    }

    #[test]
    fn path_query_defaults_and_payload() {
        let out = plans(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "servers": [{"url": "http://api.test"}],
            "paths": {
                "/user/{id}": {"get": {
                    "operationId": "getUserById",
                    "parameters": [
                        {"name": "id", "in": "path", "required": true, "schema": {"type": "string"}},
                        {"name": "limit", "in": "query", "schema": {"type": "integer", "default": 10}}
                    ],
                    "responses": {"200": {"description": "ok", "content": {"application/json": {"schema": {"type": "string"}}}}}
                }},
                "/users": {"post": {
                    "requestBody": {"required": true, "content": {"application/json": {"schema":
                        {"type": "object", "title": "User", "properties": {"name": {"type": "string"}}}}}},
                    "responses": {"201": {"description": "ok", "content": {"application/json": {"schema": {"type": "string"}}}}}
                }}
            }
        }));
        let (get, args) = &out[0];
        assert_eq!(get.base_url, "http://api.test");
        let id = &get.params["id"];
        assert_eq!((id.location, id.raw_name.as_str(), id.required), (ParamIn::Path, "id", true));
        assert_eq!(get.params["limit"].default, Some(json!(10)));
        assert_eq!(args[0].ty.to_string(), "String!");
        assert_eq!(args[1].ty.to_string(), "Int");
        assert!(get.token_path.is_none());

        let (post, args) = &out[1];
        let payload = post.payload.as_ref().unwrap();
        assert_eq!(payload.arg, "userInput");
        assert_eq!(payload.scope.as_deref(), Some("UserInput"));
        assert_eq!(args[0].ty.to_string(), "UserInput!");
    }

    #[test]
    fn sanitized_argument_names_keep_raw_names() {
        let out = plans(json!({
            "openapi": "3.0.0", "info": {"title": "t", "version": "1"},
            "paths": {"/a": {"get": {
                "parameters": [
                    {"name": "page-size", "in": "query", "schema": {"type": "integer"}},
                    {"name": "page_size", "in": "header", "schema": {"type": "integer"}}
                ],
                "responses": {"200": {"description": "ok", "content": {"application/json": {"schema": {"type": "string"}}}}}
            }}}
        }));
        let (plan, _) = &out[0];
        let names: Vec<&str> = plan.params.keys().map(String::as_str).collect();
        assert_eq!(names, vec!["pageSize", "page_size"]);
        assert_eq!(plan.params["pageSize"].raw_name, "page-size");
    }
}
