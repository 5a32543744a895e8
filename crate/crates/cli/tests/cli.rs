use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::{Arc, Mutex};

use axum::http::HeaderMap;
use axum::routing::get;
use axum::{Json, Router};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oas2gql"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/corpus").join(name)
}

#[test]
fn generate_writes_sdl_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (sdl, report) = (dir.path().join("schema.graphql"), dir.path().join("report.json"));
    let status = bin()
        .arg("generate")
        .arg(fixture("users_companies.yaml"))
        .arg("--sdl")
        .arg(&sdl)
        .arg("--report")
        .arg(&report)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&sdl).unwrap();
    assert!(text.contains("employerCompany"));
    let report: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(report["outcome"], "success");
    assert_eq!(report["warnings"], json!([]));
}

#[test]
fn strict_generation_with_a_warning_cause_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let relaxed = bin().arg("generate").arg(fixture("warn_multiple_responses.yaml")).output().unwrap();
    assert_eq!(relaxed.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&relaxed.stderr).contains("MultipleResponses"));

    let status = bin()
        .args(["generate", "--strict", "--report"])
        .arg(&report)
        .arg(fixture("warn_multiple_responses.yaml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let report: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(report["outcome"], "error");
    assert_eq!(report["error"]["kind"], "MultipleResponses");
}

#[test]
fn usage_errors_exit_2() {
    let missing = bin().args(["generate", "/no/such/file.yaml"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));
    let bad_flag = bin().args(["generate", "--casing", "shouty"]).arg(fixture("users_companies.yaml")).status().unwrap();
    assert_eq!(bad_flag.code(), Some(2));
    let no_dir = bin().args(["eval", "/no/such/dir"]).status().unwrap();
    assert_eq!(no_dir.code(), Some(2));
}

#[test]
fn eval_prints_table_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stats.json");
    let output = bin()
        .args(["eval", "--strict-also", "--out"])
        .arg(&out)
        .arg(fixture("").as_os_str())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let table = String::from_utf8(output.stdout).unwrap();
    assert!(table.contains("Success"));
    assert!(table.contains("UnsupportedFeature (extra)"));
    let stats: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let total = stats["non_strict"]["total"].as_u64().unwrap();
    let errors: u64 = stats["non_strict"]["errors_by_kind"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(stats["non_strict"]["successes"].as_u64().unwrap() + errors, total);
    assert!(stats["strict"]["successes"].as_u64() < stats["non_strict"]["successes"].as_u64());
}

struct Server(Child, String);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start(args: &[&str], oas: &Path) -> Server {
    let mut child = bin()
        .args(["serve", "--port", "0"])
        .args(args)
        .arg(oas)
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").expect("address line").to_string();
    Server(child, url)
}

async fn mock(router: Router) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });
    format!("http://{addr}")
}

#[tokio::test(flavor = "multi_thread")]
async fn serve_answers_graphql_sdl_and_report() {
    let seen: Arc<Mutex<Vec<(String, Option<String>)>>> = Arc::default();
    let log = seen.clone();
    let router = Router::new()
        .route(
            "/api/user/{id}",
            get({
                let log = log.clone();
                move |headers: HeaderMap| async move {
                    let trace = headers.get("x-trace").map(|v| v.to_str().unwrap().to_string());
                    log.lock().unwrap().push(("user".into(), trace));
                    Json(json!({"id": "erik", "name": "Erik", "employerId": "ibm"}))
                }
            }),
        )
        .route(
            "/api/company/{name}",
            get(move || async move {
                log.lock().unwrap().push(("company".into(), None));
                Json(json!({"name": "ibm", "companyName": "IBM"}))
            }),
        );
    let upstream = mock(router).await;
    let server_url = format!("{upstream}/api");
    let oas = fixture("users_companies.yaml");
    let server = start(&["--server-url", &server_url, "--header", "X-Trace: abc"], &oas);
    let client = reqwest::Client::new();

    let response = client
        .post(format!("{}/graphql", server.1))
        .json(&json!({"query": r#"{ user(id: "erik") { name employerCompany { companyName } } }"#}))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status().as_u16(), 200);
    let body: Value = response.json().await.unwrap();
    assert_eq!(
        body,
        json!({"data": {"user": {"name": "Erik", "employerCompany": {"companyName": "IBM"}}}})
    );
    let seen = seen.lock().unwrap().clone();
    assert_eq!(seen, vec![("user".into(), Some("abc".into())), ("company".into(), None)]);

    let bad = client.post(format!("{}/graphql", server.1)).body("not json").send().await.unwrap();
    assert_eq!(bad.status().as_u16(), 400);

    let sdl = client.get(format!("{}/sdl", server.1)).send().await.unwrap().text().await.unwrap();
    let generated = bin().arg("generate").arg(&oas).output().unwrap();
    assert_eq!(sdl, String::from_utf8(generated.stdout).unwrap());

    let report: Value = client.get(format!("{}/report", server.1)).send().await.unwrap().json().await.unwrap();
    assert_eq!(report["outcome"], "success");
}

#[tokio::test(flavor = "multi_thread")]
async fn token_path_reads_the_context_file() {
    let seen: Arc<Mutex<Vec<Option<String>>>> = Arc::default();
    let log = seen.clone();
    let router = Router::new().route(
        "/me",
        get(move |headers: HeaderMap| async move {
            let auth = headers.get("authorization").map(|v| v.to_str().unwrap().to_string());
            log.lock().unwrap().push(auth);
            Json(json!({"login": "erik"}))
        }),
    );
    let upstream = mock(router).await;
    let dir = tempfile::tempdir().unwrap();
    let context = dir.path().join("context.json");
    std::fs::write(&context, r#"{"security": {"oauthToken": "t0k3n"}}"#).unwrap();
    let server = start(
        &[
            "--server-url",
            &upstream,
            "--token-path",
            "security.oauthToken",
            "--context",
            context.to_str().unwrap(),
        ],
        &fixture("auth_schemes.yaml"),
    );
    let body: Value = reqwest::Client::new()
        .post(format!("{}/graphql", server.1))
        .json(&json!({"query": "{ profile { login } }"}))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(body, json!({"data": {"profile": {"login": "erik"}}}));
    assert_eq!(seen.lock().unwrap().clone(), vec![Some("Bearer t0k3n".to_string())]);
}

#[test]
fn serve_startup_failure_exits_1() {
    let status = bin()
        .args(["serve", "--port", "0", "--strict"])
        .arg(fixture("warn_multiple_responses.yaml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
