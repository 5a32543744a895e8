use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;

use super::bind::HttpRequestSpec;
use super::RuntimeError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
const EXCERPT_BYTES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn json(status: u16, body: &serde_json::Value) -> Self {
        HttpResponse {
            status,
            content_type: Some("application/json".into()),
            body: body.to_string().into_bytes(),
        }
    }
}

/// Something that can perform an upstream HTTP request.
#[async_trait]
pub trait Upstream: Send + Sync {
    async fn send(&self, spec: &HttpRequestSpec, timeout: Duration) -> Result<HttpResponse, RuntimeError>;
}

#[derive(Debug, Clone, Default)]
pub struct ReqwestUpstream {
    client: reqwest::Client,
}

impl ReqwestUpstream {
    pub fn new() -> Self {
        Self::default()
    }
}

#[async_trait]
impl Upstream for ReqwestUpstream {
    async fn send(&self, spec: &HttpRequestSpec, timeout: Duration) -> Result<HttpResponse, RuntimeError> {
        let method = reqwest::Method::from_bytes(spec.method.to_string().as_bytes())
            .map_err(|e| RuntimeError::Network(e.to_string()))?;
        let mut request = self
            .client
            .request(method, &spec.url)
            .timeout(timeout)
            .header("Accept", "application/json");
        for (k, v) in &spec.headers {
            request = request.header(k, v);
        }
        if let Some(body) = &spec.body {
            request = request.body(body.to_string());
        }
        // Error strings go through without_url so query credentials stay out.
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                RuntimeError::Timeout(timeout.as_millis() as u64)
            } else {
                RuntimeError::Network(e.without_url().to_string())
            }
        };
        let response = request.send().await.map_err(classify)?;
        let status = response.status().as_u16();
        let content_type = response
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = response.bytes().await.map_err(classify)?.to_vec();
        Ok(HttpResponse {
            status,
            content_type,
            body,
        })
    }
}

type Handler = Box<dyn Fn(&HttpRequestSpec) -> HttpResponse + Send + Sync>;

/// In-process upstream that records every request it receives.
pub struct MockUpstream {
    handler: Handler,
    log: Mutex<Vec<HttpRequestSpec>>,
}

impl MockUpstream {
    pub fn new(handler: impl Fn(&HttpRequestSpec) -> HttpResponse + Send + Sync + 'static) -> Self {
        MockUpstream {
            handler: Box::new(handler),
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn requests(&self) -> Vec<HttpRequestSpec> {
        self.log.lock().expect("mock log").clone()
    }
}

#[async_trait]
impl Upstream for MockUpstream {
    async fn send(&self, spec: &HttpRequestSpec, _timeout: Duration) -> Result<HttpResponse, RuntimeError> {
        self.log.lock().expect("mock log").push(spec.clone());
        Ok((self.handler)(spec))
    }
}

fn excerpt(body: &[u8]) -> String {
    let mut end = body.len().min(EXCERPT_BYTES);
    while end > 0 && std::str::from_utf8(&body[..end]).is_err() {
        end -= 1;
    }
    String::from_utf8_lossy(&body[..end]).into_owned()
}

/// Perform the request once. Non-2xx statuses become errors.
pub async fn execute_request(
    upstream: &dyn Upstream,
    spec: &HttpRequestSpec,
    timeout: Duration,
) -> Result<HttpResponse, RuntimeError> {
    tracing::debug!(method = %spec.method, path = spec.path_for_log(), "upstream request");
    let response = upstream.send(spec, timeout).await?;
    if !(200..300).contains(&response.status) {
        return Err(RuntimeError::UpstreamStatus {
            status: response.status,
            excerpt: excerpt(&response.body),
        });
    }
    Ok(response)
}
