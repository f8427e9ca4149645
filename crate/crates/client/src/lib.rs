//! Thin blocking client for the featsel experiment service, plus the wire
//! types both sides share.

pub mod types;

use std::time::Duration;

use featsel_core::{AggregateTable, ExperimentReport, RankTable, RunConfig};

use types::{
    ArtifactList, ErrorBody, GenerateRequest, GenerateResponse, JobState, JobStatus, RankRequest,
    SubmitResponse,
};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("http error: {0}")]
    Http(#[from] Box<ureq::Error>),

    #[error("server rejected the request ({status}): {message}")]
    Api { status: u16, message: String },

    #[error("job {0} failed on the server: {1}")]
    JobFailed(u64, String),

    #[error("decode error: {0}")]
    Decode(String),
}

impl From<ureq::Error> for ClientError {
    fn from(e: ureq::Error) -> Self {
        ClientError::Http(Box::new(e))
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// Client for one server base URL (e.g. `http://127.0.0.1:8080`).
pub struct Client {
    base: String,
    agent: ureq::Agent,
}

/// Pull the server's error body out of a non-2xx response, falling back to
/// the bare status code.
fn check_status(res: &mut ureq::http::Response<ureq::Body>) -> Result<()> {
    let status = res.status().as_u16();
    if (200..300).contains(&status) {
        return Ok(());
    }
    let message = res
        .body_mut()
        .read_json::<ErrorBody>()
        .map(|b| b.error)
        .unwrap_or_else(|_| "no error body".to_string());
    Err(ClientError::Api { status, message })
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let mut base = base_url.into();
        while base.ends_with('/') {
            base.pop();
        }
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build();
        Client {
            base,
            agent: config.into(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn get_json<T: serde::de::DeserializeOwned>(&self, path: &str) -> Result<T> {
        let mut res = self.agent.get(self.url(path)).call()?;
        check_status(&mut res)?;
        res.body_mut()
            .read_json()
            .map_err(|e| ClientError::Decode(e.to_string()))
    }

    fn post_json<B: serde::Serialize, T: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<T> {
        let mut res = self.agent.post(self.url(path)).send_json(body)?;
        check_status(&mut res)?;
        res.body_mut()
            .read_json()
            .map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub fn health(&self) -> Result<()> {
        let mut res = self.agent.get(self.url("/health")).call()?;
        check_status(&mut res)
    }

    /// Submit an experiment; returns the job id.
    pub fn submit_experiment(&self, config: &RunConfig) -> Result<u64> {
        let res: SubmitResponse = self.post_json("/api/v1/experiments", config)?;
        Ok(res.job_id)
    }

    pub fn status(&self, job_id: u64) -> Result<JobStatus> {
        self.get_json(&format!("/api/v1/experiments/{job_id}"))
    }

    /// Poll until the job finishes. `on_progress` sees every status snapshot.
    pub fn wait(
        &self,
        job_id: u64,
        poll: Duration,
        mut on_progress: impl FnMut(&JobStatus),
    ) -> Result<JobStatus> {
        loop {
            let status = self.status(job_id)?;
            on_progress(&status);
            match status.state {
                JobState::Done => return Ok(status),
                JobState::Failed => {
                    return Err(ClientError::JobFailed(
                        job_id,
                        status.error.unwrap_or_else(|| "unknown error".into()),
                    ))
                }
                JobState::Queued | JobState::Running => std::thread::sleep(poll),
            }
        }
    }

    pub fn report(&self, job_id: u64) -> Result<ExperimentReport> {
        self.get_json(&format!("/api/v1/experiments/{job_id}/report"))
    }

    pub fn artifacts(&self, job_id: u64) -> Result<Vec<String>> {
        let res: ArtifactList = self.get_json(&format!("/api/v1/experiments/{job_id}/artifacts"))?;
        Ok(res.artifacts)
    }

    /// Raw bytes of one artifact, exactly as the server wrote them.
    pub fn fetch_artifact(&self, job_id: u64, name: &str) -> Result<Vec<u8>> {
        let mut res = self
            .agent
            .get(self.url(&format!("/api/v1/experiments/{job_id}/artifacts/{name}")))
            .call()?;
        check_status(&mut res)?;
        res.body_mut()
            .read_to_vec()
            .map_err(|e| ClientError::Decode(e.to_string()))
    }

    /// Generate a synthetic dataset server-side; returns CSV text plus the
    /// ground-truth sidecar.
    pub fn generate(&self, request: &GenerateRequest) -> Result<GenerateResponse> {
        self.post_json("/api/v1/datasets/generate", request)
    }

    /// Re-run the score-based ranking analysis over aggregate tables.
    pub fn rank(&self, tables: Vec<AggregateTable>) -> Result<RankTable> {
        self.post_json("/api/v1/rank", &RankRequest { tables })
    }
}
