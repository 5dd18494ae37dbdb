use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use graphfam::io::{dataset_files, DatasetMode};
use graphfam::pipeline::generate_dataset;
use graphfam::validation::{validate_family, ValidationOptions, ValidationReport};
use graphfam::{build_universe, generate_family, FamilyConfig, UniverseConfig};
use graphfam_service::{archive, router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> (Router, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    (router(AppState::new(dir.path().to_path_buf())), dir)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn parse(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

async fn universe_id(app: &Router, config: &UniverseConfig) -> String {
    let (status, body) = call(app, "POST", "/api/universe", Some(serde_json::to_value(config).unwrap())).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    parse(&body)["universe_id"].as_str().unwrap().to_string()
}

/// Two communities whose self-propensities both clip to zero, so no graph
/// can place any edge inside a community.
fn hollow_universe() -> UniverseConfig {
    (0..)
        .map(|seed| UniverseConfig {
            community_count: 2,
            edge_propensity_variance: 1.0,
            seed,
            ..Default::default()
        })
        .find(|c| {
            let u = build_universe(c).unwrap();
            u.propensity.get(0, 0) == 0.0 && u.propensity.get(1, 1) == 0.0 && u.propensity.get(0, 1) > 0.0
        })
        .unwrap()
}

fn small_family(graph_count: usize) -> FamilyConfig {
    FamilyConfig {
        graph_count,
        node_range: (30, 60),
        ..Default::default()
    }
}

#[tokio::test]
async fn universe_is_content_addressed() {
    let (app, _dir) = app();
    let config = UniverseConfig::default();
    let a = universe_id(&app, &config).await;
    assert_eq!(a, universe_id(&app, &config).await);
    let other = UniverseConfig { seed: 7, ..config };
    assert_ne!(a, universe_id(&app, &other).await);
}

#[tokio::test]
async fn flat_universe_summary() {
    let (app, _dir) = app();
    let body = json!({ "edge_propensity_variance": 0.0 });
    let (status, bytes) = call(&app, "POST", "/api/universe", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let p = &parse(&bytes)["summary"]["propensity"];
    assert_eq!((p["min"].as_f64(), p["mean"].as_f64(), p["max"].as_f64()), (Some(1.0), Some(1.0), Some(1.0)));
}

#[tokio::test]
async fn invalid_universe_is_bad_request() {
    let (app, _dir) = app();
    let (status, bytes) = call(&app, "POST", "/api/universe", Some(json!({ "community_count": 1 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&bytes)["field"], "community_count");
    let (status, _) = call(&app, "POST", "/api/universe", Some(json!({ "community_count": "ten" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn preview_returns_renderable_graphs() {
    let (app, _dir) = app();
    let id = universe_id(&app, &UniverseConfig::default()).await;
    let req = json!({ "universe_id": id, "sample_count": 3 });
    let (status, first) = call(&app, "POST", "/api/preview", Some(req.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let v = parse(&first);
    let graphs = v["graphs"].as_array().unwrap();
    assert_eq!(graphs.len(), 3);
    for g in graphs {
        let n = g["node_count"].as_u64().unwrap() as usize;
        assert_eq!(g["layout"].as_array().unwrap().len(), n);
        assert_eq!(g["community_labels"].as_array().unwrap().len(), n);
        // Connected graphs have at least n - 1 edges.
        assert!(g["edges"].as_array().unwrap().len() >= n - 1);
        assert!(g["metrics"]["homophily"].is_number());
    }
    assert_eq!(v["metrics"]["homophily"]["count"], 3);
    let (_, second) = call(&app, "POST", "/api/preview", Some(req)).await;
    assert_eq!(first, second);
}

#[tokio::test]
async fn full_homophily_preview_has_no_cross_edges() {
    let (app, _dir) = app();
    let id = universe_id(&app, &UniverseConfig { edge_propensity_variance: 0.1, ..Default::default() }).await;
    let family = FamilyConfig { homophily_range: (1.0, 1.0), ..Default::default() };
    let req = json!({ "universe_id": id, "family_config": family, "sample_count": 2 });
    let (status, bytes) = call(&app, "POST", "/api/preview", Some(req)).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
    for g in parse(&bytes)["graphs"].as_array().unwrap() {
        let labels = g["community_labels"].as_array().unwrap();
        let cross = g["edges"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| labels[e[0].as_u64().unwrap() as usize] != labels[e[1].as_u64().unwrap() as usize])
            .count();
        // Only connectivity repair may cross communities.
        assert!(cross <= g["repair_edge_count"].as_u64().unwrap() as usize, "{cross}");
        assert!(g["metrics"]["prob_matrix_deviation"].is_number());
    }
}

#[tokio::test]
async fn preview_errors() {
    let (app, _dir) = app();
    let (status, _) = call(&app, "POST", "/api/preview", Some(json!({ "universe_id": "nope" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let id = universe_id(&app, &UniverseConfig::default()).await;
    let (status, _) = call(&app, "POST", "/api/preview", Some(json!({ "universe_id": id, "sample_count": 11 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let bad = FamilyConfig { homophily_range: (0.8, 0.2), ..Default::default() };
    let (status, _) =
        call(&app, "POST", "/api/preview", Some(json!({ "universe_id": id, "family_config": bad }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let hollow = universe_id(&app, &hollow_universe()).await;
    let family = FamilyConfig { community_range: (2, 2), ..Default::default() };
    let (status, _) =
        call(&app, "POST", "/api/preview", Some(json!({ "universe_id": hollow, "family_config": family }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

async fn wait_for_job(app: &Router, job: &str) -> Value {
    let mut last = 0;
    for _ in 0..600 {
        let (_, bytes) = call(app, "GET", &format!("/api/dataset/{job}"), None).await;
        let v = parse(&bytes);
        let progress = v["progress"].as_u64().unwrap();
        assert!(progress >= last, "progress went backwards");
        last = progress;
        if matches!(v["state"].as_str(), Some("done" | "failed")) {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    panic!("job {job} did not finish");
}

#[tokio::test(flavor = "multi_thread")]
async fn dataset_archive_matches_library_output() {
    let (app, dir) = app();
    let config = UniverseConfig::default();
    let id = universe_id(&app, &config).await;
    let family = small_family(100);
    let (status, bytes) =
        call(&app, "POST", "/api/dataset", Some(json!({ "universe_id": id, "family_config": family }))).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let job = parse(&bytes)["job_id"].as_str().unwrap().to_string();
    let done = wait_for_job(&app, &job).await;
    assert_eq!(done["state"], "done");
    assert_eq!(done["progress"], 100);

    let (status, tar) = call(&app, "GET", &format!("/api/dataset/{job}?format=tar"), None).await;
    assert_eq!(status, StatusCode::OK);
    let expected = generate_dataset(&config, &family, DatasetMode::Inductive, &Default::default()).unwrap();
    let files = dataset_files(&expected.dataset).unwrap();
    let unpacked = archive::unpack(&tar).unwrap();
    assert_eq!(unpacked.len(), files.len());
    for ((name, bytes), (want_name, want)) in unpacked.iter().zip(&files) {
        assert_eq!(name, want_name);
        assert!(bytes == want, "{name} differs");
        assert_eq!(&std::fs::read(dir.path().join(&job).join(name)).unwrap(), want);
    }
    assert_eq!(tar, archive::pack(&files).unwrap());

    // Same request, same job.
    let (status, bytes) =
        call(&app, "POST", "/api/dataset", Some(json!({ "universe_id": id, "family_config": family }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(parse(&bytes)["job_id"], job.as_str());
}

#[tokio::test(flavor = "multi_thread")]
async fn failed_job_reports_failures() {
    let (app, _dir) = app();
    let id = universe_id(&app, &hollow_universe()).await;
    let family = FamilyConfig { community_range: (2, 2), ..small_family(20) };
    let (_, bytes) =
        call(&app, "POST", "/api/dataset", Some(json!({ "universe_id": id, "family_config": family }))).await;
    let job = parse(&bytes)["job_id"].as_str().unwrap().to_string();
    let state = wait_for_job(&app, &job).await;
    assert_eq!(state["state"], "failed");
    assert_eq!(state["report"]["failed"], 20);
    let (status, _) = call(&app, "GET", &format!("/api/dataset/{job}"), None).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    let (status, _) = call(&app, "GET", "/api/dataset/unknown", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn validate_matches_library_report() {
    let (app, _dir) = app();
    let config = UniverseConfig::default();
    let id = universe_id(&app, &config).await;
    let (status, _) =
        call(&app, "POST", "/api/validate", Some(json!({ "universe_id": id, "graph_count": 101 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, bytes) =
        call(&app, "POST", "/api/validate", Some(json!({ "universe_id": id, "graph_count": 30 }))).await;
    assert_eq!(status, StatusCode::OK);
    let mut report: ValidationReport = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(report.graphs.len(), 30);
    for metric in [
        "homophily",
        "avg_degree",
        "degree_tail_ratio_99",
        "generation_time_sec",
        "prob_matrix_deviation",
        "feature_signal_f1",
        "degree_signal_f1",
        "structure_signal_f1",
        "structure_consistency",
        "degree_consistency",
    ] {
        assert!(report.mean(metric).is_some(), "{metric} missing");
    }
    assert!(report.feature_consistency.is_some());

    let universe = build_universe(&config).unwrap();
    let family = FamilyConfig { graph_count: 30, ..Default::default() };
    let outcome = generate_family(&universe, &family).unwrap();
    let mut expected = validate_family(&universe, &outcome.instances, None, &ValidationOptions::default());
    // Timings are the only field allowed to differ.
    for r in report.graphs.iter_mut().chain(expected.graphs.iter_mut()) {
        r.generation_time_sec = None;
    }
    report.summary.remove("generation_time_sec");
    assert_eq!(report.graphs, expected.graphs);
    assert_eq!(report.summary, expected.summary);
    assert_eq!(report.feature_consistency, expected.feature_consistency);
}

#[tokio::test]
async fn cors_allows_only_local_origins() {
    let (app, _dir) = app();
    for (origin, allowed) in [
        ("http://localhost:5173", true),
        ("http://127.0.0.1:8080", true),
        ("https://example.com", false),
        ("http://localhost.evil.com", false),
    ] {
        let req = Request::builder()
            .method("OPTIONS")
            .uri("/api/universe")
            .header("origin", origin)
            .header("access-control-request-method", "POST")
            .body(Body::empty())
            .unwrap();
        let resp = app.clone().oneshot(req).await.unwrap();
        let header = resp.headers().get("access-control-allow-origin");
        assert_eq!(header.is_some(), allowed, "{origin}");
    }
}
