use std::fmt;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde_json::{Map, Value};

use crate::ingest::HttpMethod;
use crate::preprocess::{desanitize_tree, SanitationMap};

use super::context::ExecutionContext;
use super::plan::{ParamIn, ResolvePlan};
use super::RuntimeError;

const PATH_SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

/// A fully bound upstream request.
#[derive(Clone, PartialEq)]
pub struct HttpRequestSpec {
    pub method: HttpMethod,
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Option<Value>,
}

impl HttpRequestSpec {
    /// URL without the query string, safe to log.
    pub fn path_for_log(&self) -> &str {
        self.url.split('?').next().unwrap_or(&self.url)
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn append_query(&mut self, name: &str, value: &str) {
        let pair = url::form_urlencoded::Serializer::new(String::new())
            .append_pair(name, value)
            .finish();
        self.url.push(if self.url.contains('?') { '&' } else { '?' });
        self.url.push_str(&pair);
    }
}

// Header values and query strings may hold credentials.
impl fmt::Debug for HttpRequestSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpRequestSpec")
            .field("method", &self.method)
            .field("path", &self.path_for_log())
            .field("headers", &self.headers.iter().map(|(k, _)| k).collect::<Vec<_>>())
            .field("body", &self.body.is_some())
            .finish()
    }
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Bind runtime inputs into a request. Per parameter the first present
/// source wins: explicit argument, link value, value propagated from an
/// ancestor request, declared default. Returns the request and the values
/// sent, keyed by raw parameter name.
pub fn bind_runtime(
    plan: &ResolvePlan,
    args: &Map<String, Value>,
    link_values: &Map<String, Value>,
    ctx: &ExecutionContext,
    sanitation: &SanitationMap,
) -> Result<(HttpRequestSpec, Map<String, Value>), RuntimeError> {
    let present = |v: Option<&Value>| v.filter(|v| !v.is_null()).cloned();
    let mut sent = Map::new();
    let mut path = plan.path.clone();
    let mut query: Vec<(String, String)> = Vec::new();
    let mut headers: Vec<(String, String)> = ctx.headers.iter().cloned().collect();

    for binding in plan.params.values() {
        let value = match present(args.get(&binding.arg)) {
            Some(v) => Some(desanitize_tree(&v, sanitation, binding.scope.as_deref())),
            None => present(link_values.get(&binding.raw_name))
                .or_else(|| present(ctx.used_params.get(&binding.raw_name)))
                .or_else(|| binding.default.clone()),
        };
        let Some(value) = value else {
            if binding.required {
                return Err(RuntimeError::MissingRequiredParameter(binding.raw_name.clone()));
            }
            continue;
        };
        match binding.location {
            ParamIn::Path => {
                let encoded = utf8_percent_encode(&scalar_text(&value), PATH_SEGMENT).to_string();
                path = path.replace(&format!("{{{}}}", binding.raw_name), &encoded);
            }
            ParamIn::Query => match &value {
                Value::Array(items) => {
                    for item in items {
                        query.push((binding.raw_name.clone(), scalar_text(item)));
                    }
                }
                other => query.push((binding.raw_name.clone(), scalar_text(other))),
            },
            ParamIn::Header => headers.push((binding.raw_name.clone(), scalar_text(&value))),
        }
        sent.insert(binding.raw_name.clone(), value);
    }

    let body = match &plan.payload {
        Some(payload) if plan.method.accepts_body() => match present(args.get(&payload.arg)) {
            Some(Value::String(text)) if payload.text => {
                Some(serde_json::from_str(&text).unwrap_or(Value::String(text)))
            }
            Some(value) => Some(desanitize_tree(&value, sanitation, payload.scope.as_deref())),
            None if payload.required => return Err(RuntimeError::MissingRequiredParameter(payload.arg.clone())),
            None => None,
        },
        _ => None,
    };
    if let Some(payload) = &plan.payload {
        if body.is_some() {
            headers.push(("Content-Type".into(), payload.media.clone()));
        }
    }

    let mut url = format!("{}{}", plan.base_url.trim_end_matches('/'), path);
    if !query.is_empty() {
        let mut encoder = url::form_urlencoded::Serializer::new(String::new());
        for (k, v) in &query {
            encoder.append_pair(k, v);
        }
        url.push('?');
        url.push_str(&encoder.finish());
    }
    Ok((
        HttpRequestSpec {
            method: plan.method,
            url,
            headers,
            body,
        },
        sent,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::plan::{ParamBinding, PayloadBinding, ResponseBinding};
    use crate::schema::TypeRef;
    use indexmap::IndexMap;
    use serde_json::json;

    fn plan() -> ResolvePlan {
        let mut params = IndexMap::new();
        let mut add = |arg: &str, location, raw: &str, required, default: Option<Value>| {
            params.insert(
                arg.to_string(),
                ParamBinding {
                    arg: arg.into(),
                    location,
                    raw_name: raw.into(),
                    required,
                    default,
                    ty: TypeRef::named("String"),
                    scope: None,
                },
            );
        };
        add("id", ParamIn::Path, "id", true, None);
        add("limit", ParamIn::Query, "limit", false, Some(json!(10)));
        add("xTrace", ParamIn::Header, "X-Trace", false, None);
        ResolvePlan {
            operation_index: 0,
            operation_id: None,
            method: HttpMethod::Get,
            path: "/user/{id}".into(),
            base_url: "http://api.test/v1/".into(),
            params,
            payload: None,
            security: vec![],
            response: ResponseBinding {
                status: "200".into(),
                ty: TypeRef::named("String"),
                scope: None,
                json: true,
            },
            link_bindings: IndexMap::new(),
            token_path: None,
            arg_scope: "op:0".into(),
        }
    }

    fn args(value: Value) -> Map<String, Value> {
        value.as_object().unwrap().clone()
    }

    #[test]
    fn explicit_args_and_defaults() {
        let (spec, sent) = bind_runtime(
            &plan(),
            &args(json!({"id": "erik"})),
            &Map::new(),
            &ExecutionContext::default(),
            &SanitationMap::new(),
        )
        .unwrap();
        assert_eq!(spec.url, "http://api.test/v1/user/erik?limit=10");
        assert_eq!(sent["limit"], json!(10));
        assert!(spec.body.is_none());
    }

    #[test]
    fn path_values_are_escaped_and_headers_set() {
        let (spec, _) = bind_runtime(
            &plan(),
            &args(json!({"id": "a b/c", "limit": 3, "xTrace": "t"})),
            &Map::new(),
            &ExecutionContext::default(),
            &SanitationMap::new(),
        )
        .unwrap();
        assert_eq!(spec.url, "http://api.test/v1/user/a%20b%2Fc?limit=3");
        assert_eq!(spec.header("x-trace"), Some("t"));
    }

    #[test]
    fn missing_required_parameter() {
        let err = bind_runtime(
            &plan(),
            &Map::new(),
            &Map::new(),
            &ExecutionContext::default(),
            &SanitationMap::new(),
        )
        .unwrap_err();
        assert_eq!(err, RuntimeError::MissingRequiredParameter("id".into()));
    }

    #[test]
    fn propagated_values_fill_gaps() {
        let mut ctx = ExecutionContext::default();
        ctx.used_params.insert("id".into(), json!("from-parent"));
        let (spec, _) = bind_runtime(&plan(), &Map::new(), &Map::new(), &ctx, &SanitationMap::new()).unwrap();
        assert!(spec.url.contains("/user/from-parent"));
    }

    #[test]
    fn body_is_desanitized() {
        let mut p = plan();
        p.method = HttpMethod::Post;
        p.params.clear();
        p.path = "/users".into();
        p.payload = Some(PayloadBinding {
            arg: "userInput".into(),
            ty: TypeRef::named("UserInput"),
            media: "application/json".into(),
            required: true,
            scope: Some("UserInput".into()),
            text: false,
        });
        let mut map = SanitationMap::new();
        map.register_mapping("UserInput", "$id", "id");
        let (spec, _) = bind_runtime(
            &p,
            &args(json!({"userInput": {"id": 1}})),
            &Map::new(),
            &ExecutionContext::default(),
            &map,
        )
        .unwrap();
        assert_eq!(spec.body, Some(json!({"$id": 1})));
        assert_eq!(spec.header("content-type"), Some("application/json"));
    }
}
