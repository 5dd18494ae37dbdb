//! Local HTTP API over the generator: universe design, previews, small-family
//! validation and asynchronous dataset jobs packed as tar archives.
//!
//! Every response is reproducible from library calls: universes and jobs are
//! addressed by SHA-256 of their canonical JSON inputs, and all randomness
//! comes from the keyed streams of the core crate.

pub mod archive;
pub mod layout;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use graphfam::io::{dataset_files, sha256_hex, to_canonical_vec, write_dataset, DatasetMode};
use graphfam::pipeline::generate_dataset;
use graphfam::tasks::community_labels;
use graphfam::validation::consistency::{degree_consistency, feature_consistency, structure_consistency};
use graphfam::validation::metrics::{average_degree, degree_tail_ratio_99, graph_homophily, prob_matrix_deviation};
use graphfam::validation::stats::{mean, std_dev};
use graphfam::validation::{validate_family, MetricSummary, ValidationOptions};
use graphfam::{build_universe, generate_family, generate_graph, FamilyConfig, GenError, GraphInstance, Universe, UniverseConfig};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const MAX_PREVIEW_GRAPHS: usize = 10;
pub const MAX_VALIDATE_GRAPHS: usize = 100;
const DATASET_WORKERS: usize = 2;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "state")]
enum JobState {
    Pending,
    Running,
    Done { archive_sha256: String },
    Failed { report: serde_json::Value },
}

struct Job {
    total: usize,
    progress: AtomicUsize,
    state: Mutex<JobState>,
    archive: Mutex<Option<Arc<Vec<u8>>>>,
}

pub struct AppState {
    universes: RwLock<HashMap<String, Arc<Universe>>>,
    jobs: RwLock<HashMap<String, Arc<Job>>>,
    data_dir: PathBuf,
    workers: Arc<Semaphore>,
}

impl AppState {
    pub fn new(data_dir: PathBuf) -> Arc<Self> {
        Arc::new(Self {
            universes: RwLock::default(),
            jobs: RwLock::default(),
            data_dir,
            workers: Arc::new(Semaphore::new(DATASET_WORKERS)),
        })
    }

    fn universe(&self, id: &str) -> Result<Arc<Universe>, ApiError> {
        self.universes
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown universe {id}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: serde_json::json!({ "error": message.into() }),
        }
    }
}

impl From<GenError> for ApiError {
    fn from(e: GenError) -> Self {
        let message = e.to_string();
        match e {
            GenError::InvalidConfig { field, .. } => Self {
                status: StatusCode::BAD_REQUEST,
                body: serde_json::json!({ "error": message, "field": field }),
            },
            GenError::InvalidArgument(_) => Self::new(StatusCode::BAD_REQUEST, message),
            GenError::UnsatisfiableHomophily { .. } | GenError::NonFiniteScale => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
            }
            GenError::FamilyFailed { .. } => Self {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                body: failure_report(&e),
            },
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        canonical(self.status, &self.body)
    }
}

fn failure_report(e: &GenError) -> serde_json::Value {
    match e {
        GenError::FamilyFailed { failed, total, failures } => serde_json::json!({
            "error": e.to_string(),
            "failed": failed,
            "total": total,
            "failures": failures,
        }),
        other => serde_json::json!({ "error": other.to_string() }),
    }
}

/// Canonical JSON body, so identical results give identical bytes.
fn canonical<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match to_canonical_vec(value) {
        Ok(bytes) => (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(origin) = origin.to_str() else { return false };
    let Some(rest) = origin.strip_prefix("http://").or_else(|| origin.strip_prefix("https://")) else {
        return false;
    };
    let host = match rest.strip_prefix('[') {
        Some(v6) => v6.split(']').next().map(|h| format!("[{h}]")).unwrap_or_default(),
        None => rest.split(':').next().unwrap_or_default().to_string(),
    };
    matches!(host.as_str(), "localhost" | "127.0.0.1" | "[::1]")
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin, _| is_local_origin(origin)))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/universe", post(create_universe))
        .route("/api/preview", post(preview))
        .route("/api/dataset", post(create_dataset))
        .route("/api/dataset/{job_id}", get(dataset_status))
        .route("/api/validate", post(validate))
        .layer(cors)
        .with_state(state)
}

/// Serves on `127.0.0.1:port` until the process ends.
pub async fn serve(port: u16, data_dir: PathBuf) -> std::io::Result<()> {
    std::fs::create_dir_all(&data_dir)?;
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(data_dir))).await
}

/// Blocking entry point for callers without a runtime.
pub fn run(port: u16, data_dir: PathBuf) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(port, data_dir))
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Range3 {
    min: f64,
    mean: f64,
    max: f64,
}

fn range3(values: &[f64]) -> Option<Range3> {
    Some(Range3 {
        min: values.iter().copied().reduce(f64::min)?,
        mean: mean(values)?,
        max: values.iter().copied().reduce(f64::max)?,
    })
}

#[derive(Serialize)]
struct UniverseSummary {
    community_count: usize,
    feature_dim: usize,
    edge_propensity_variance: f64,
    centroid_distance: Option<Range3>,
    propensity: Option<Range3>,
}

fn summarize(universe: &Universe) -> UniverseSummary {
    let c = &universe.centroids;
    let mut distances = Vec::new();
    for (i, a) in c.iter().enumerate() {
        for b in &c[i + 1..] {
            distances.push(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
        }
    }
    UniverseSummary {
        community_count: universe.config.community_count,
        feature_dim: universe.config.feature_dim,
        edge_propensity_variance: universe.config.edge_propensity_variance,
        centroid_distance: range3(&distances),
        propensity: range3(universe.propensity.values()),
    }
}

async fn create_universe(
    State(state): State<Arc<AppState>>,
    body: Result<Json<UniverseConfig>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(config) = body?;
    config.validate()?;
    let id = sha256_hex(&to_canonical_vec(&config).expect("config serializes"));
    let cached = state.universes.read().unwrap().get(&id).cloned();
    let universe = match cached {
        Some(u) => u,
        None => {
            let built = Arc::new(blocking(move || build_universe(&config)).await??);
            state.universes.write().unwrap().entry(id.clone()).or_insert(built).clone()
        }
    };
    Ok(canonical(
        StatusCode::OK,
        &serde_json::json!({ "universe_id": id, "summary": summarize(&universe) }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PreviewRequest {
    universe_id: String,
    #[serde(default)]
    family_config: FamilyConfig,
    #[serde(default = "default_preview_count")]
    sample_count: usize,
}

fn default_preview_count() -> usize {
    3
}

#[derive(Serialize)]
struct PreviewMetrics {
    homophily: Option<f64>,
    avg_degree: f64,
    degree_tail_ratio_99: Option<f64>,
    prob_matrix_deviation: f64,
    structure_consistency: Option<f64>,
    degree_consistency: Option<f64>,
}

#[derive(Serialize)]
struct PreviewGraph {
    graph_index: usize,
    node_count: usize,
    communities: Vec<usize>,
    community_labels: Vec<usize>,
    edges: Vec<[usize; 2]>,
    /// Edges added to connect components; the only ones exempt from `P*`.
    repair_edge_count: usize,
    layout: Vec<[f64; 2]>,
    metrics: PreviewMetrics,
}

#[derive(Serialize)]
struct PreviewResponse {
    graphs: Vec<PreviewGraph>,
    metrics: BTreeMap<String, MetricSummary>,
    feature_consistency: Option<f64>,
}

fn summary_of(rows: &[(&'static str, Option<f64>)], into: &mut BTreeMap<&'static str, Vec<f64>>) {
    for &(name, value) in rows {
        let column = into.entry(name).or_default();
        if let Some(v) = value {
            column.push(v);
        }
    }
}

fn build_preview(universe: &Universe, family: &FamilyConfig, count: usize) -> Result<PreviewResponse, GenError> {
    let seed = family.effective_seed(universe);
    let instances = (0..count)
        .map(|i| generate_graph(universe, family, i))
        .collect::<Result<Vec<GraphInstance>, _>>()?;
    let degree = degree_consistency(&instances, universe);
    let mut columns = BTreeMap::new();
    let graphs = instances
        .iter()
        .zip(degree)
        .map(|(g, degree_consistency)| {
            let metrics = PreviewMetrics {
                homophily: graph_homophily(g),
                avg_degree: average_degree(g),
                degree_tail_ratio_99: degree_tail_ratio_99(g),
                prob_matrix_deviation: prob_matrix_deviation(g, &g.p_star),
                structure_consistency: structure_consistency(g, universe),
                degree_consistency,
            };
            summary_of(
                &[
                    ("homophily", metrics.homophily),
                    ("avg_degree", Some(metrics.avg_degree)),
                    ("degree_tail_ratio_99", metrics.degree_tail_ratio_99),
                    ("prob_matrix_deviation", Some(metrics.prob_matrix_deviation)),
                    ("structure_consistency", metrics.structure_consistency),
                    ("degree_consistency", metrics.degree_consistency),
                ],
                &mut columns,
            );
            let key = [universe.config.seed, seed, g.graph_index as u64];
            PreviewGraph {
                graph_index: g.graph_index,
                node_count: g.node_count(),
                communities: g.communities.clone(),
                community_labels: community_labels(g),
                edges: g.edges.clone(),
                repair_edge_count: g.repair_edge_count,
                layout: layout::force_layout(g.node_count(), &g.edges, &key),
                metrics,
            }
        })
        .collect();
    let metrics = columns
        .into_iter()
        .filter_map(|(name, values)| {
            Some((
                name.to_string(),
                MetricSummary {
                    mean: mean(&values)?,
                    std: std_dev(&values)?,
                    count: values.len(),
                },
            ))
        })
        .collect();
    Ok(PreviewResponse {
        graphs,
        metrics,
        feature_consistency: feature_consistency(&instances),
    })
}

async fn preview(
    State(state): State<Arc<AppState>>,
    body: Result<Json<PreviewRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let universe = state.universe(&req.universe_id)?;
    if !(1..=MAX_PREVIEW_GRAPHS).contains(&req.sample_count) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("sample_count must lie in 1..={MAX_PREVIEW_GRAPHS}"),
        ));
    }
    req.family_config.validate(universe.config.community_count)?;
    let response =
        blocking(move || build_preview(&universe, &req.family_config, req.sample_count)).await??;
    Ok(canonical(StatusCode::OK, &response))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetRequest {
    universe_id: String,
    #[serde(default)]
    family_config: FamilyConfig,
    #[serde(default)]
    mode: Option<DatasetMode>,
}

async fn create_dataset(
    State(state): State<Arc<AppState>>,
    body: Result<Json<DatasetRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let universe = state.universe(&req.universe_id)?;
    let mode = req.mode.unwrap_or(DatasetMode::Inductive);
    let family = req.family_config;
    family.validate(universe.config.community_count)?;
    if mode == DatasetMode::Transductive && family.graph_count != 1 {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "transductive mode needs graph_count = 1",
        ));
    }
    let key = serde_json::json!({ "universe_id": req.universe_id, "family_config": family, "mode": mode });
    let job_id = sha256_hex(&to_canonical_vec(&key).expect("request serializes"));

    let job = {
        let mut jobs = state.jobs.write().unwrap();
        if jobs.contains_key(&job_id) {
            return Ok(canonical(StatusCode::OK, &serde_json::json!({ "job_id": job_id })));
        }
        let job = Arc::new(Job {
            total: family.graph_count,
            progress: AtomicUsize::new(0),
            state: Mutex::new(JobState::Pending),
            archive: Mutex::new(None),
        });
        jobs.insert(job_id.clone(), job.clone());
        job
    };

    let workers = state.workers.clone();
    let out_dir = state.data_dir.join(&job_id);
    tokio::spawn(async move {
        let Ok(_permit) = workers.acquire_owned().await else { return };
        *job.state.lock().unwrap() = JobState::Running;
        let worker_job = job.clone();
        let result = tokio::task::spawn_blocking(move || run_dataset_job(&universe, &family, mode, &worker_job, &out_dir)).await;
        let state = match result {
            Ok(Ok(archive)) => {
                let hash = sha256_hex(&archive);
                *job.archive.lock().unwrap() = Some(Arc::new(archive));
                JobState::Done { archive_sha256: hash }
            }
            Ok(Err(report)) => JobState::Failed { report },
            Err(e) => JobState::Failed {
                report: serde_json::json!({ "error": e.to_string() }),
            },
        };
        *job.state.lock().unwrap() = state;
    });
    Ok(canonical(StatusCode::ACCEPTED, &serde_json::json!({ "job_id": job_id })))
}

fn run_dataset_job(
    universe: &Universe,
    family: &FamilyConfig,
    mode: DatasetMode,
    job: &Job,
    out_dir: &std::path::Path,
) -> Result<Vec<u8>, serde_json::Value> {
    let generated = generate_dataset(&universe.config, family, mode, &job.progress).map_err(|e| failure_report(&e))?;
    let io_error = |e: &dyn std::fmt::Display| serde_json::json!({ "error": e.to_string() });
    write_dataset(out_dir, &generated.dataset, true).map_err(|e| io_error(&e))?;
    let files = dataset_files(&generated.dataset).map_err(|e| io_error(&e))?;
    let archive = archive::pack(&files).map_err(|e| io_error(&e))?;
    std::fs::write(out_dir.with_extension("tar"), &archive).map_err(|e| io_error(&e))?;
    Ok(archive)
}

#[derive(Deserialize)]
struct StatusQuery {
    format: Option<String>,
}

async fn dataset_status(
    State(state): State<Arc<AppState>>,
    Path(job_id): Path<String>,
    Query(query): Query<StatusQuery>,
) -> Result<Response, ApiError> {
    let job = state
        .jobs
        .read()
        .unwrap()
        .get(&job_id)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown job {job_id}")))?;
    let current = job.state.lock().unwrap().clone();
    let mut status = serde_json::to_value(&current).expect("state serializes");
    status["job_id"] = job_id.clone().into();
    status["progress"] = job.progress.load(Ordering::Relaxed).into();
    status["total"] = job.total.into();
    match (&current, query.format.as_deref()) {
        (JobState::Failed { .. }, _) => Ok(canonical(StatusCode::INTERNAL_SERVER_ERROR, &status)),
        (JobState::Done { .. }, Some("tar")) => {
            let bytes = job.archive.lock().unwrap().clone().expect("done job has an archive");
            Ok((
                StatusCode::OK,
                [
                    (header::CONTENT_TYPE, "application/x-tar".to_string()),
                    (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{job_id}.tar\"")),
                ],
                bytes.as_ref().clone(),
            )
                .into_response())
        }
        (_, Some("tar")) => Ok(canonical(StatusCode::CONFLICT, &status)),
        (_, Some(other)) => Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown format {other:?}"))),
        (_, None) => Ok(canonical(StatusCode::OK, &status)),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateRequest {
    universe_id: String,
    #[serde(default)]
    family_config: FamilyConfig,
    #[serde(default = "default_validate_count")]
    graph_count: usize,
}

fn default_validate_count() -> usize {
    30
}

async fn validate(
    State(state): State<Arc<AppState>>,
    body: Result<Json<ValidateRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let universe = state.universe(&req.universe_id)?;
    if !(1..=MAX_VALIDATE_GRAPHS).contains(&req.graph_count) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("graph_count must lie in 1..={MAX_VALIDATE_GRAPHS}"),
        ));
    }
    let family = FamilyConfig {
        graph_count: req.graph_count,
        ..req.family_config
    };
    family.validate(universe.config.community_count)?;
    let report = blocking(move || -> Result<_, GenError> {
        let outcome = generate_family(&universe, &family)?;
        Ok(validate_family(
            &universe,
            &outcome.instances,
            Some(&outcome.generation_secs),
            &ValidationOptions::default(),
        ))
    })
    .await??;
    Ok(canonical(StatusCode::OK, &report))
}
