//! Resolve plans and everything that happens at query time: binding
//! arguments, link expressions, authentication, HTTP and response shaping.

mod auth;
mod bind;
mod context;
mod http;
mod link_expr;
mod plan;
mod shape;

use thiserror::Error;

pub use auth::inject_auth;
pub use bind::{bind_runtime, HttpRequestSpec};
pub use context::{json_path, Credential, ExecutionContext};
pub use http::{execute_request, HttpResponse, MockUpstream, ReqwestUpstream, Upstream, DEFAULT_TIMEOUT};
pub use shape::{coerce_leaf, shape_response, ShapedResponse};
pub use link_expr::{eval_link_expression, parse_link_expression, LinkExpr};
pub use plan::{make_resolve_plan, LinkBinding, ParamBinding, ParamIn, PayloadBinding, ResolvePlan, ResponseBinding};

/// Field-level failures while resolving against the upstream API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("missing required parameter {0}")]
    MissingRequiredParameter(String),
    #[error("missing credentials for security scheme {0}")]
    MissingCredentials(String),
    #[error("link expression could not be evaluated: {0}")]
    ExpressionUnresolvable(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("upstream request timed out after {0} ms")]
    Timeout(u64),
    #[error("upstream responded with status {status}: {excerpt}")]
    UpstreamStatus { status: u16, excerpt: String },
    #[error("upstream response is not JSON: {0}")]
    UpstreamNotJson(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
