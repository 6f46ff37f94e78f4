//! Model endpoints: a uniform prediction surface over remote HTTP models and
//! deterministic memorizing stub models.
//!
//! The stub family simulates clean vs contaminated behavior at desk scale:
//! a "memorized" sample is answered with the gold answer verbatim, a
//! non-memorized one with a truncated gold prefix, and memorization survives
//! a non-identity transform only with the configured per-transform retention
//! probability. All randomness is keyed hashing, so predictions are
//! independent of evaluation order and parallelism.

use std::collections::BTreeMap;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use base64::Engine;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::QASample;
use crate::hashing::{below_fraction, hash64};
use crate::imageops::{encode_png, Raster};
use crate::metrics::{tokenize, TokenizerConfig};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("environment variable {0} (named by api_key_env_var) is not set")]
    MissingApiKey(String),
    #[error("temperature is pinned to 0, got {0}")]
    BadTemperature(f64),
    #[error("memorized_fraction must lie in [0, 1], got {0}")]
    BadMemorizedFraction(f64),
    #[error("base_keep_fraction must lie in (0, 1], got {0}")]
    BadBaseKeepFraction(f64),
    #[error("retention for {transform_id:?} must lie in [0, 1], got {value}")]
    BadRetention { transform_id: String, value: f64 },
    #[error("HTTP {status} from model endpoint: {body}")]
    Http { status: u16, body: String },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("retries exhausted after {attempts} attempt(s), last status {last_status}")]
    RetriesExhausted { attempts: u32, last_status: u16 },
    #[error("malformed response body: {0}")]
    MalformedResponse(String),
    #[error("failed to encode image for request: {0}")]
    ImageEncode(#[from] crate::imageops::ImageOpsError),
    #[error("replay fixture exhausted: no canned exchange left for request to {0}")]
    ReplayExhausted(String),
    #[error("failed to read replay fixture {path}: {message}")]
    ReplayFixture { path: String, message: String },
}

/// An abstract model endpoint evaluated by the runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoint {
    pub id: String,
    #[serde(flatten)]
    pub kind: EndpointKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointKind {
    RemoteHttp(RemoteHttpConfig),
    Stub(StubModelConfig),
}

fn default_timeout_secs() -> f64 {
    60.0
}
fn default_max_retries() -> u32 {
    2
}
fn default_max_in_flight() -> usize {
    4
}
fn default_backoff_ms() -> u64 {
    250
}

/// Remote OpenAI-compatible vision chat-completions endpoint. The API key is
/// read from the named environment variable, never from the config itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteHttpConfig {
    pub base_url: String,
    pub model_name: String,
    pub api_key_env_var: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Deterministic decoding requested; pinned to 0.
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_backoff_ms")]
    pub retry_backoff_ms: u64,
}

impl RemoteHttpConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.temperature != 0.0 {
            return Err(ModelError::BadTemperature(self.temperature));
        }
        Ok(())
    }
}

/// Deterministic memorizing stub. `memorized_fraction = 0` realizes a clean
/// model, `memorized_fraction = 1` a fully contaminated one; `retention`
/// gives the per-transform probability that a memorized answer survives the
/// input transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubModelConfig {
    pub memorized_fraction: f64,
    pub mem_seed: u64,
    #[serde(default)]
    pub retention: BTreeMap<String, f64>,
    pub base_keep_fraction: f64,
}

impl StubModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.memorized_fraction) {
            return Err(ModelError::BadMemorizedFraction(self.memorized_fraction));
        }
        if !(self.base_keep_fraction > 0.0 && self.base_keep_fraction <= 1.0) {
            return Err(ModelError::BadBaseKeepFraction(self.base_keep_fraction));
        }
        for (id, &value) in &self.retention {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::BadRetention { transform_id: id.clone(), value });
            }
        }
        Ok(())
    }
}

/// One model answer for a (sample, transform, endpoint) grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub endpoint_id: String,
    pub sample_id: String,
    pub transform_id: String,
    pub text: String,
    pub latency_ms: u64,
    #[serde(default)]
    pub retries: u32,
    #[serde(default)]
    pub from_cache: bool,
}

/// Stub prediction semantics. Membership and retention are decided by
/// `hash64(mem_seed, sample_id)` and `hash64(mem_seed, sample_id,
/// transform_id)` thresholds; the base answer is the first
/// `ceil(base_keep_fraction * |tokens|)` tokens of the tokenized gold answer
/// joined by single spaces. A transform id absent from the retention map is
/// treated as retention 0.
pub fn stub_predict(cfg: &StubModelConfig, sample: &QASample, transform_id: &str) -> String {
    let seed = cfg.mem_seed.to_string();
    let memorized =
        below_fraction(hash64(&[&seed, &sample.id]), cfg.memorized_fraction);
    if memorized {
        if transform_id == "id" {
            return sample.answer.clone();
        }
        let retention = cfg.retention.get(transform_id).copied().unwrap_or(0.0);
        if below_fraction(hash64(&[&seed, &sample.id, transform_id]), retention) {
            return sample.answer.clone();
        }
    }
    base_answer(cfg, &sample.answer)
}

fn base_answer(cfg: &StubModelConfig, gold: &str) -> String {
    let tokens = tokenize(gold, &TokenizerConfig::default());
    let keep = (cfg.base_keep_fraction * tokens.len() as f64).ceil() as usize;
    tokens.tokens()[..keep.min(tokens.len())].join(" ")
}

// --- HTTP transport ---------------------------------------------------------

/// Outcome of one HTTP exchange, before any retry logic.
#[derive(Debug)]
pub enum TransportOutcome {
    Http { status: u16, body: String },
    Timeout,
    ConnectError { message: String },
}

/// Minimal POST-JSON transport; the production implementation is reqwest,
/// tests substitute replay or scripted transports.
pub trait HttpTransport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer_token: &str,
        body: &serde_json::Value,
        timeout: Duration,
    ) -> Result<TransportOutcome, ModelError>;
}

/// reqwest-backed transport used for real endpoints.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Self {
        Self { client: reqwest::blocking::Client::new() }
    }
}

impl Default for ReqwestTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl HttpTransport for ReqwestTransport {
    fn post_json(
        &self,
        url: &str,
        bearer_token: &str,
        body: &serde_json::Value,
        timeout: Duration,
    ) -> Result<TransportOutcome, ModelError> {
        let result = self
            .client
            .post(url)
            .bearer_auth(bearer_token)
            .json(body)
            .timeout(timeout)
            .send();
        match result {
            Ok(response) => {
                let status = response.status().as_u16();
                let text = response.text().unwrap_or_default();
                Ok(TransportOutcome::Http { status, body: text })
            }
            Err(err) if err.is_timeout() => Ok(TransportOutcome::Timeout),
            Err(err) => Ok(TransportOutcome::ConnectError { message: err.to_string() }),
        }
    }
}

// --- record/replay ------------------------------------------------------------

/// One serialized request/response exchange; the on-disk record/replay
/// fixture format is one JSON file per exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordedExchange {
    pub request: RecordedRequest,
    pub response: RecordedResponse,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordedRequest {
    pub url: String,
    pub body: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordedResponse {
    Http { status: u16, body: String },
    Timeout,
    ConnectError { message: String },
}

impl RecordedExchange {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), ModelError> {
        let json = serde_json::to_vec_pretty(self).expect("exchange serializes");
        std::fs::write(path.as_ref(), json).map_err(|e| ModelError::ReplayFixture {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ModelError> {
        let bytes = std::fs::read(path.as_ref()).map_err(|e| ModelError::ReplayFixture {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_slice(&bytes).map_err(|e| ModelError::ReplayFixture {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Transport that serves canned responses in order and records every request
/// it sees, for offline conformance tests.
pub struct ReplayTransport {
    queue: Mutex<std::collections::VecDeque<RecordedResponse>>,
    seen: Mutex<Vec<RecordedRequest>>,
}

impl ReplayTransport {
    pub fn new(responses: Vec<RecordedResponse>) -> Self {
        Self { queue: Mutex::new(responses.into()), seen: Mutex::new(Vec::new()) }
    }

    /// Load canned responses from exchange fixture files, in the given order.
    pub fn from_fixture_files<P: AsRef<std::path::Path>>(paths: &[P]) -> Result<Self, ModelError> {
        let responses = paths
            .iter()
            .map(|p| RecordedExchange::load(p).map(|e| e.response))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(responses))
    }

    /// Requests observed so far, in arrival order.
    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.seen.lock().unwrap().clone()
    }
}

impl HttpTransport for ReplayTransport {
    fn post_json(
        &self,
        url: &str,
        _bearer_token: &str,
        body: &serde_json::Value,
        _timeout: Duration,
    ) -> Result<TransportOutcome, ModelError> {
        self.seen
            .lock()
            .unwrap()
            .push(RecordedRequest { url: url.to_string(), body: body.clone() });
        let response = self
            .queue
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| ModelError::ReplayExhausted(url.to_string()))?;
        Ok(match response {
            RecordedResponse::Http { status, body } => TransportOutcome::Http { status, body },
            RecordedResponse::Timeout => TransportOutcome::Timeout,
            RecordedResponse::ConnectError { message } => {
                TransportOutcome::ConnectError { message }
            }
        })
    }
}

// --- remote client -------------------------------------------------------------

/// Counting semaphore bounding global in-flight requests per endpoint.
struct Gate {
    state: Mutex<usize>,
    cv: Condvar,
    cap: usize,
}

impl Gate {
    fn new(cap: usize) -> Self {
        Self { state: Mutex::new(0), cv: Condvar::new(), cap: cap.max(1) }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut inflight = self.state.lock().unwrap();
        while *inflight >= self.cap {
            inflight = self.cv.wait(inflight).unwrap();
        }
        *inflight += 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut inflight = self.gate.state.lock().unwrap();
        *inflight -= 1;
        self.gate.cv.notify_one();
    }
}

/// Client for an OpenAI-compatible vision chat-completions endpoint, with
/// bounded in-flight requests and retry with exponential backoff plus jitter.
pub struct RemoteClient {
    endpoint_id: String,
    config: RemoteHttpConfig,
    api_key: String,
    transport: Box<dyn HttpTransport>,
    gate: Gate,
}

impl RemoteClient {
    pub fn new(endpoint_id: &str, config: RemoteHttpConfig) -> Result<Self, ModelError> {
        Self::with_transport(endpoint_id, config, Box::new(ReqwestTransport::new()))
    }

    pub fn with_transport(
        endpoint_id: &str,
        config: RemoteHttpConfig,
        transport: Box<dyn HttpTransport>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env_var)
            .map_err(|_| ModelError::MissingApiKey(config.api_key_env_var.clone()))?;
        let gate = Gate::new(config.max_in_flight);
        Ok(Self { endpoint_id: endpoint_id.to_string(), config, api_key, transport, gate })
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    /// Build the chat-completions request body. The image travels as a PNG
    /// base64 data URL; only the question text is ever sent.
    pub fn request_body(&self, question: &str, image: &Raster) -> Result<serde_json::Value, ModelError> {
        let png = encode_png(image)?;
        let b64 = base64::engine::general_purpose::STANDARD.encode(&png);
        Ok(serde_json::json!({
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": question},
                    {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{b64}")}}
                ]
            }]
        }))
    }

    pub fn predict(
        &self,
        question: &str,
        image: &Raster,
        sample_id: &str,
        transform_id: &str,
    ) -> Result<Prediction, ModelError> {
        let body = self.request_body(question, image)?;
        let url = self.url();
        let timeout = Duration::from_secs_f64(self.config.timeout_secs);
        let start = Instant::now();

        let _slot = self.gate.acquire();
        let mut attempt: u32 = 0;
        loop {
            let outcome = self.transport.post_json(&url, &self.api_key, &body, timeout)?;
            let retryable = match outcome {
                TransportOutcome::Http { status: 200, body } => {
                    let text = parse_completion_text(&body)?;
                    return Ok(Prediction {
                        endpoint_id: self.endpoint_id.clone(),
                        sample_id: sample_id.to_string(),
                        transform_id: transform_id.to_string(),
                        text,
                        latency_ms: start.elapsed().as_millis() as u64,
                        retries: attempt,
                        from_cache: false,
                    });
                }
                TransportOutcome::Http { status, body }
                    if status == 429 || (500..=599).contains(&status) =>
                {
                    Some((status, body))
                }
                TransportOutcome::Http { status, body } => {
                    return Err(ModelError::Http { status, body });
                }
                TransportOutcome::Timeout => None,
                TransportOutcome::ConnectError { message } => {
                    if attempt >= self.config.max_retries {
                        return Err(ModelError::Transport { attempts: attempt + 1, message });
                    }
                    None
                }
            };
            if attempt >= self.config.max_retries {
                return Err(match retryable {
                    Some((status, _)) => ModelError::RetriesExhausted {
                        attempts: attempt + 1,
                        last_status: status,
                    },
                    None => ModelError::Timeout { attempts: attempt + 1 },
                });
            }
            self.backoff(attempt);
            attempt += 1;
        }
    }

    fn backoff(&self, attempt: u32) {
        let base = self.config.retry_backoff_ms.saturating_mul(1u64 << attempt.min(10));
        let jitter = if base == 0 { 0 } else { rand::thread_rng().gen_range(0..=base / 2) };
        std::thread::sleep(Duration::from_millis(base + jitter));
    }
}

fn parse_completion_text(body: &str) -> Result<String, ModelError> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| ModelError::MalformedResponse(format!("not JSON: {e}")))?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| {
            ModelError::MalformedResponse(
                "missing choices[0].message.content string".to_string(),
            )
        })
}

// --- uniform client ------------------------------------------------------------

/// Dispatching client over the endpoint kinds. The remote arm receives only
/// the question text and image; the gold answer never reaches the HTTP layer.
pub enum ModelClient {
    Stub { endpoint_id: String, config: StubModelConfig },
    Remote(RemoteClient),
}

impl ModelClient {
    pub fn from_endpoint(endpoint: &ModelEndpoint) -> Result<Self, ModelError> {
        match &endpoint.kind {
            EndpointKind::Stub(config) => {
                config.validate()?;
                Ok(ModelClient::Stub { endpoint_id: endpoint.id.clone(), config: config.clone() })
            }
            EndpointKind::RemoteHttp(config) => {
                Ok(ModelClient::Remote(RemoteClient::new(&endpoint.id, config.clone())?))
            }
        }
    }

    pub fn endpoint_id(&self) -> &str {
        match self {
            ModelClient::Stub { endpoint_id, .. } => endpoint_id,
            ModelClient::Remote(client) => &client.endpoint_id,
        }
    }

    pub fn predict(
        &self,
        sample: &QASample,
        image: &Raster,
        transform_id: &str,
    ) -> Result<Prediction, ModelError> {
        match self {
            ModelClient::Stub { endpoint_id, config } => Ok(Prediction {
                endpoint_id: endpoint_id.clone(),
                sample_id: sample.id.clone(),
                transform_id: transform_id.to_string(),
                text: stub_predict(config, sample, transform_id),
                latency_ms: 0,
                retries: 0,
                from_cache: false,
            }),
            ModelClient::Remote(client) => {
                client.predict(&sample.question, image, &sample.id, transform_id)
            }
        }
    }
}
