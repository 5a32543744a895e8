use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::Args;
use oas2gql_core::exec::{run_request, Engine, ExecOptions, GraphQLRequest};
use oas2gql_core::report::finalize_report;
use oas2gql_core::runtime::{ExecutionContext, ReqwestUpstream};
use oas2gql_core::schema::print_sdl;
use oas2gql_core::{generate_from_path, GenerateOptions};
use serde_json::{json, Value};

#[derive(Args)]
pub struct ServeArgs {
    pub oas: PathBuf,
    /// 0 picks a free port; the bound address is printed on stdout.
    #[arg(long, default_value_t = 4000)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    strict: bool,
    /// Extra header sent on every upstream request, as `name:value`.
    #[arg(long = "header", value_parser = parse_header)]
    headers: Vec<(String, String)>,
    /// Path of the bearer token inside the context file, e.g. `security.oauthToken`.
    #[arg(long)]
    token_path: Option<String>,
    /// JSON file with values (such as tokens) the resolvers can read.
    #[arg(long)]
    context: Option<PathBuf>,
    /// Upstream request timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    /// Call this base URL instead of the one in the document.
    #[arg(long)]
    server_url: Option<String>,
}

fn parse_header(text: &str) -> Result<(String, String), String> {
    match text.split_once(':') {
        Some((name, value)) if !name.trim().is_empty() => Ok((name.trim().to_string(), value.trim().to_string())),
        _ => Err(format!("expected name:value, got {text:?}")),
    }
}

struct App {
    engine: Engine,
    context: ExecutionContext,
    sdl: String,
    report: String,
}

async fn graphql(State(app): State<Arc<App>>, body: Bytes) -> impl IntoResponse {
    let request: GraphQLRequest = match serde_json::from_slice(&body) {
        Ok(request) => request,
        Err(e) => {
            let body = json!({"errors": [{"message": format!("Malformed request body: {e}")}]});
            return (StatusCode::BAD_REQUEST, Json(body));
        }
    };
    let (status, result) = run_request(&app.engine, &request, &app.context).await;
    let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json(result.to_json()))
}

async fn sdl(State(app): State<Arc<App>>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], app.sdl.clone())
}

async fn report(State(app): State<Arc<App>>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], app.report.clone())
}

pub fn run(args: ServeArgs) -> anyhow::Result<ExitCode> {
    let options = GenerateOptions {
        strict: args.strict,
        token_path: args.token_path.clone(),
        ..Default::default()
    };
    let generated = match generate_from_path(&args.oas, &options) {
        Ok(generated) => generated,
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            return Ok(ExitCode::from(super::EXIT_GENERATION));
        }
    };
    let mut schema = generated.schema;
    if let Some(url) = &args.server_url {
        for plan in &mut schema.plans {
            plan.base_url = url.clone();
        }
    }
    let token_store = match &args.context {
        Some(path) => {
            let text = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_slice(&text).with_context(|| format!("{} is not JSON", path.display()))?
        }
        None => Value::Null,
    };
    if args.timeout == 0 {
        bail!("--timeout must be positive");
    }
    let app = Arc::new(App {
        sdl: print_sdl(&schema),
        report: finalize_report(&generated.report),
        context: ExecutionContext::new(token_store, args.headers.clone()),
        engine: Engine::new(
            Arc::new(schema),
            Arc::new(ReqwestUpstream::new()),
            ExecOptions {
                timeout: Duration::from_secs(args.timeout),
                ..Default::default()
            },
        ),
    });
    let router = Router::new()
        .route("/graphql", post(graphql))
        .route("/sdl", get(sdl))
        .route("/report", get(report))
        .with_state(app);

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .with_context(|| format!("cannot bind {}:{}", args.host, args.port))?;
        println!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router).await?;
        Ok(ExitCode::SUCCESS)
    })
}
