//! Experiment job service. Experiments run for minutes, so the API is
//! submit-and-poll: POST a run config, poll the job, then download the
//! artifacts the run wrote (byte-identical to a local engine run).
//!
//! Routes:
//!   GET  /health
//!   POST /api/v1/experiments                     -> { job_id }
//!   GET  /api/v1/experiments/{id}                -> job status + progress
//!   GET  /api/v1/experiments/{id}/report         -> full report JSON
//!   GET  /api/v1/experiments/{id}/artifacts      -> { artifacts: [names] }
//!   GET  /api/v1/experiments/{id}/artifacts/{*}  -> raw artifact bytes
//!   POST /api/v1/datasets/generate               -> { csv, sidecar }
//!   POST /api/v1/rank                            -> rank table JSON

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use featsel_client::types::{
    ArtifactList, ErrorBody, GenerateRequest, GenerateResponse, JobState, JobStatus, RankRequest,
    SubmitResponse,
};
use featsel_core::dataset::{make_synthetic, write_csv, SyntheticSidecar};
use featsel_core::report::score_rank;
use featsel_core::{ExperimentReport, RunConfig};

#[derive(Debug)]
struct Job {
    state: JobState,
    dir: PathBuf,
    done: Arc<AtomicU64>,
    total: u64,
    artifacts: Vec<String>,
    error: Option<String>,
}

pub struct AppState {
    data_dir: PathBuf,
    next_id: AtomicU64,
    jobs: Mutex<HashMap<u64, Job>>,
}

impl AppState {
    pub fn new(data_dir: PathBuf) -> Arc<Self> {
        Arc::new(AppState {
            data_dir,
            next_id: AtomicU64::new(1),
            jobs: Mutex::new(HashMap::new()),
        })
    }
}

type SharedState = Arc<AppState>;

/// Serve the API on an already-bound listener.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: SharedState,
) -> std::io::Result<()> {
    axum::serve(listener, build_router(state)).await
}

pub fn build_router(state: SharedState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/api/v1/experiments", post(submit_experiment))
        .route("/api/v1/experiments/{id}", get(job_status))
        .route("/api/v1/experiments/{id}/report", get(job_report))
        .route("/api/v1/experiments/{id}/artifacts", get(list_artifacts))
        .route(
            "/api/v1/experiments/{id}/artifacts/{*name}",
            get(fetch_artifact),
        )
        .route("/api/v1/datasets/generate", post(generate_dataset))
        .route("/api/v1/rank", post(rank))
        .with_state(state)
}

enum ApiError {
    NotFound(String),
    Conflict(String),
    BadRequest(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(ErrorBody { error: message })).into_response()
    }
}

async fn health() -> &'static str {
    "ok"
}

async fn submit_experiment(
    State(state): State<SharedState>,
    Json(config): Json<RunConfig>,
) -> Result<(StatusCode, Json<SubmitResponse>), ApiError> {
    let resolved = config
        .validate()
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let total = featsel_core::experiment::planned_jobs(&resolved);

    let job_id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let dir = state.data_dir.join(format!("job_{job_id}"));
    let done = Arc::new(AtomicU64::new(0));
    state.jobs.lock().unwrap().insert(
        job_id,
        Job {
            state: JobState::Queued,
            dir: dir.clone(),
            done: Arc::clone(&done),
            total,
            artifacts: Vec::new(),
            error: None,
        },
    );

    let state_for_task = Arc::clone(&state);
    tokio::spawn(async move {
        set_job_state(&state_for_task, job_id, JobState::Running);
        let progress: featsel_core::ProgressFn = {
            let done = Arc::clone(&done);
            Arc::new(move |d, _| done.store(d, Ordering::Relaxed))
        };
        let result = tokio::task::spawn_blocking(move || {
            featsel_core::artifacts::run_to_dir(&config, &dir, Some(progress))
        })
        .await;

        let mut jobs = state_for_task.jobs.lock().unwrap();
        let job = jobs.get_mut(&job_id).expect("job exists");
        match result {
            Ok(Ok(manifest)) => {
                job.artifacts = manifest.artifacts;
                job.state = JobState::Done;
                tracing::info!(job_id, "experiment finished");
            }
            Ok(Err(e)) => {
                job.error = Some(e.to_string());
                job.state = JobState::Failed;
                tracing::warn!(job_id, error = %e, "experiment failed");
            }
            Err(join_err) => {
                job.error = Some(format!("worker panicked: {join_err}"));
                job.state = JobState::Failed;
                tracing::error!(job_id, %join_err, "experiment worker panicked");
            }
        }
    });

    Ok((StatusCode::ACCEPTED, Json(SubmitResponse { job_id })))
}

fn set_job_state(state: &SharedState, job_id: u64, new_state: JobState) {
    if let Some(job) = state.jobs.lock().unwrap().get_mut(&job_id) {
        job.state = new_state;
    }
}

fn with_job<T>(
    state: &SharedState,
    job_id: u64,
    f: impl FnOnce(&Job) -> T,
) -> Result<T, ApiError> {
    let jobs = state.jobs.lock().unwrap();
    jobs.get(&job_id)
        .map(f)
        .ok_or_else(|| ApiError::NotFound(format!("no job {job_id}")))
}

async fn job_status(
    State(state): State<SharedState>,
    Path(job_id): Path<u64>,
) -> Result<Json<JobStatus>, ApiError> {
    with_job(&state, job_id, |job| {
        Json(JobStatus {
            job_id,
            state: job.state,
            done_units: job.done.load(Ordering::Relaxed),
            total_units: job.total,
            error: job.error.clone(),
        })
    })
}

async fn job_report(
    State(state): State<SharedState>,
    Path(job_id): Path<u64>,
) -> Result<Json<ExperimentReport>, ApiError> {
    let (job_state, dir) = with_job(&state, job_id, |job| (job.state, job.dir.clone()))?;
    if job_state != JobState::Done {
        return Err(ApiError::Conflict(format!(
            "job {job_id} is not done ({job_state:?})"
        )));
    }
    let text = std::fs::read_to_string(dir.join(featsel_core::artifacts::REPORT_NAME))
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    let report: ExperimentReport =
        serde_json::from_str(&text).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(report))
}

async fn list_artifacts(
    State(state): State<SharedState>,
    Path(job_id): Path<u64>,
) -> Result<Json<ArtifactList>, ApiError> {
    let (job_state, artifacts) =
        with_job(&state, job_id, |job| (job.state, job.artifacts.clone()))?;
    if job_state != JobState::Done {
        return Err(ApiError::Conflict(format!(
            "job {job_id} is not done ({job_state:?})"
        )));
    }
    Ok(Json(ArtifactList { artifacts }))
}

async fn fetch_artifact(
    State(state): State<SharedState>,
    Path((job_id, name)): Path<(u64, String)>,
) -> Result<Response, ApiError> {
    let (dir, known) = with_job(&state, job_id, |job| {
        (job.dir.clone(), job.artifacts.contains(&name))
    })?;
    // only names from the manifest are served; no path escapes
    if !known {
        return Err(ApiError::NotFound(format!(
            "job {job_id} has no artifact `{name}`"
        )));
    }
    let bytes = std::fs::read(dir.join(&name)).map_err(|e| ApiError::Internal(e.to_string()))?;
    let content_type = if name.ends_with(".json") {
        "application/json"
    } else {
        "text/csv"
    };
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

async fn generate_dataset(
    Json(req): Json<GenerateRequest>,
) -> Result<Json<GenerateResponse>, ApiError> {
    let informative: Vec<usize> = match (&req.informative, req.num_informative) {
        (Some(_), Some(_)) => {
            return Err(ApiError::BadRequest(
                "set either informative or num_informative, not both".into(),
            ))
        }
        (Some(list), None) => list.clone(),
        (None, Some(n)) => (0..n).collect(),
        (None, None) => Vec::new(),
    };
    let result = tokio::task::spawn_blocking(move || -> featsel_core::Result<GenerateResponse> {
        let data = make_synthetic(req.features, req.rows, &informative, req.noise, req.seed)?;
        let tmp = tempfile_path();
        write_csv(&data, &tmp)?;
        let csv = std::fs::read_to_string(&tmp).map_err(|e| featsel_core::Error::Io {
            path: tmp.clone(),
            source: e,
        })?;
        let _ = std::fs::remove_file(&tmp);
        Ok(GenerateResponse {
            csv,
            sidecar: SyntheticSidecar::for_dataset(&data).expect("synthetic provenance"),
        })
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    result.map(Json).map_err(|e| ApiError::BadRequest(e.to_string()))
}

fn tempfile_path() -> PathBuf {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    std::env::temp_dir().join(format!(
        "featsel_gen_{}_{}.csv",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ))
}

async fn rank(
    Json(req): Json<RankRequest>,
) -> Result<Json<featsel_core::RankTable>, ApiError> {
    score_rank(&req.tables)
        .map(Json)
        .map_err(|e| ApiError::BadRequest(e.to_string()))
}
