use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use indexmap::IndexMap;
use serde_json::Value;

use crate::ingest::{ParamLocation, SecurityScheme, SecuritySchemeKind};

use super::bind::HttpRequestSpec;
use super::context::{json_path, Credential, ExecutionContext};
use super::plan::ResolvePlan;
use super::RuntimeError;

/// Apply the first security requirement of the operation that the context
/// can satisfy. Operations without requirements pass through unchanged.
pub fn inject_auth(
    mut spec: HttpRequestSpec,
    plan: &ResolvePlan,
    ctx: &ExecutionContext,
    schemes: &IndexMap<String, SecurityScheme>,
) -> Result<HttpRequestSpec, RuntimeError> {
    if plan.security.is_empty() {
        return Ok(spec);
    }
    for name in &plan.security {
        let Some(scheme) = schemes.get(name) else { continue };
        match (&scheme.kind, ctx.credentials.get(name)) {
            (SecuritySchemeKind::ApiKey { name: key, location }, Some(Credential::ApiKey(value))) => {
                match location {
                    ParamLocation::Query => spec.append_query(key, value),
                    _ => spec.headers.push((key.clone(), value.clone())),
                }
                return Ok(spec);
            }
            (SecuritySchemeKind::Basic, Some(Credential::Basic { username, password })) => {
                let encoded = STANDARD.encode(format!("{username}:{password}"));
                spec.headers.push(("Authorization".into(), format!("Basic {encoded}")));
                return Ok(spec);
            }
            (SecuritySchemeKind::Bearer, _) => {
                let token = plan
                    .token_path
                    .as_deref()
                    .and_then(|path| json_path(&ctx.token_store, path));
                if let Some(Value::String(token)) = token {
                    spec.headers.push(("Authorization".into(), format!("Bearer {token}")));
                    return Ok(spec);
                }
            }
            _ => {}
        }
    }
    Err(RuntimeError::MissingCredentials(plan.security.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::HttpMethod;
    use crate::runtime::plan::ResponseBinding;
    use crate::schema::TypeRef;
    use serde_json::json;

    fn schemes() -> IndexMap<String, SecurityScheme> {
        let mut out = IndexMap::new();
        let mut add = |name: &str, kind| {
            out.insert(
                name.to_string(),
                SecurityScheme {
                    name: name.into(),
                    kind,
                    description: None,
                },
            );
        };
        add(
            "header_key",
            SecuritySchemeKind::ApiKey {
                name: "X-Key".into(),
                location: ParamLocation::Header,
            },
        );
        add(
            "query_key",
            SecuritySchemeKind::ApiKey {
                name: "api_key".into(),
                location: ParamLocation::Query,
            },
        );
        add("basic", SecuritySchemeKind::Basic);
        add("oauth", SecuritySchemeKind::Bearer);
        out
    }

    fn plan(security: &[&str]) -> ResolvePlan {
        ResolvePlan {
            operation_index: 0,
            operation_id: None,
            method: HttpMethod::Get,
            path: "/x".into(),
            base_url: "http://h".into(),
            params: IndexMap::new(),
            payload: None,
            security: security.iter().map(|s| s.to_string()).collect(),
            response: ResponseBinding {
                status: "200".into(),
                ty: TypeRef::named("String"),
                scope: None,
                json: true,
            },
            link_bindings: IndexMap::new(),
            token_path: Some("security.token".into()),
            arg_scope: "op:0".into(),
        }
    }

    fn spec() -> HttpRequestSpec {
        HttpRequestSpec {
            method: HttpMethod::Get,
            url: "http://h/x?a=1".into(),
            headers: vec![],
            body: None,
        }
    }

    #[test]
    fn api_key_in_header_and_query() {
        let ctx = ExecutionContext::default().with_credentials([
            ("header_key".to_string(), Credential::ApiKey("k1".into())),
            ("query_key".to_string(), Credential::ApiKey("k 2".into())),
        ]);
        let out = inject_auth(spec(), &plan(&["header_key"]), &ctx, &schemes()).unwrap();
        assert_eq!(out.header("x-key"), Some("k1"));
        let out = inject_auth(spec(), &plan(&["query_key"]), &ctx, &schemes()).unwrap();
        assert_eq!(out.url, "http://h/x?a=1&api_key=k+2");
    }

    #[test]
    fn basic_auth_header() {
        let ctx = ExecutionContext::default().with_credentials([(
            "basic".to_string(),
            Credential::Basic {
                username: "Aladdin".into(),
                password: "open sesame".into(),
            },
        )]);
        let out = inject_auth(spec(), &plan(&["basic"]), &ctx, &schemes()).unwrap();
        assert_eq!(out.header("authorization"), Some("Basic QWxhZGRpbjpvcGVuIHNlc2FtZQ=="));
    }

    #[test]
    fn bearer_from_token_store_and_fallback_order() {
        let ctx = ExecutionContext::new(json!({"security": {"token": "abc"}}), vec![]);
        let out = inject_auth(spec(), &plan(&["basic", "oauth"]), &ctx, &schemes()).unwrap();
        assert_eq!(out.header("authorization"), Some("Bearer abc"));
    }

    #[test]
    fn missing_credentials() {
        let err = inject_auth(spec(), &plan(&["basic"]), &ExecutionContext::default(), &schemes()).unwrap_err();
        assert!(matches!(err, RuntimeError::MissingCredentials(_)));
        assert!(inject_auth(spec(), &plan(&[]), &ExecutionContext::default(), &schemes()).is_ok());
    }
}
