//! Evaluation grid orchestration: for every endpoint and every transform,
//! predict on every test sample, score each cell, and report contamination
//! gaps and distances to the uncontaminated target.
//!
//! Determinism contract: transformed images are computed once per
//! (transform, image) and shared across endpoints; predictions are cached on
//! disk keyed by content digests; aggregation is a fold over id-sorted
//! results, so the canonical run document is byte-identical regardless of
//! parallelism, scheduling, or cache state.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{DatasetError, DatasetManifest, Provenance, QASample};
use crate::imageops::{self, ImageOpsError, InputFormat, Raster, TransformSet};
use crate::metrics::{
    score_pairs, tokenize, MetricKind, MetricScores, MetricsError, TokenizerConfig,
    METRIC_VARIANT,
};
use crate::models::{ModelClient, ModelEndpoint, ModelError, Prediction};

pub const RUN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("evaluation plan needs at least one endpoint")]
    NoEndpoints,
    #[error("duplicate endpoint id {0:?} in evaluation plan")]
    DuplicateEndpointId(String),
    #[error("parallelism must be >= 1")]
    BadParallelism,
    #[error("cannot evaluate an empty test set")]
    EmptyTestSet,
    #[error("cache directory {path} is not usable: {source}")]
    CacheDir { path: PathBuf, source: std::io::Error },
    #[error("failed to read image {path}: {source}")]
    ImageRead { path: PathBuf, source: std::io::Error },
    #[error("image {path} has an unsupported extension (expected .png/.jpg/.jpeg)")]
    ImageFormat { path: PathBuf },
    #[error("failed to decode image {path}: {source}")]
    ImageDecode { path: PathBuf, source: ImageOpsError },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("run aborted under strict failure policy: endpoint {endpoint_id}, sample \
             {sample_id}, transform {transform_id}: {message}")]
    Aborted { endpoint_id: String, sample_id: String, transform_id: String, message: String },
    #[error("unknown endpoint id {0:?}")]
    UnknownEndpoint(String),
    #[error("failed to read run document {path}: {message}")]
    Document { path: String, message: String },
}

/// What to do when a sample fails after retries: abort the run, or record
/// the failure and exclude the sample from scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    #[default]
    Strict,
    Skip,
}

/// Everything the runner needs for one grid evaluation.
#[derive(Debug)]
pub struct EvaluationPlan {
    pub endpoints: Vec<ModelEndpoint>,
    pub transforms: TransformSet,
    pub test_set: DatasetManifest,
    pub cache_dir: PathBuf,
    pub parallelism: usize,
    pub tokenizer: TokenizerConfig,
    pub failure_policy: FailurePolicy,
}

/// Result-affecting knobs echoed verbatim into every run document, so no
/// decision the harness made is silent. Execution-only settings
/// (parallelism, cache location) do not influence scores and are omitted to
/// keep the document byte-identical across environments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(default)]
    pub metric_variant: String,
    #[serde(default)]
    pub transform_conventions: String,
    #[serde(default)]
    pub tokenizer: Option<TokenizerConfig>,
    #[serde(default)]
    pub endpoints: Vec<ModelEndpoint>,
    #[serde(default)]
    pub transforms: Vec<String>,
    #[serde(default)]
    pub failure_policy: FailurePolicy,
    #[serde(default)]
    pub dataset_digest: String,
    #[serde(default)]
    pub dataset_samples: usize,
    #[serde(default)]
    pub dataset_provenance: Option<Provenance>,
}

/// A per-sample failure recorded under the `skip` policy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FailureRecord {
    pub endpoint_id: String,
    pub transform_id: String,
    pub sample_id: String,
    pub error: String,
}

/// Volatile run diagnostics; not part of the canonical document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub endpoint_calls: usize,
}

/// The full evaluation grid plus per-sample predictions.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub endpoint_order: Vec<String>,
    pub transform_order: Vec<String>,
    pub grid: BTreeMap<(String, String), MetricScores>,
    pub predictions: Vec<Prediction>,
    pub failures: Vec<FailureRecord>,
    pub config_echo: ConfigEcho,
    pub stats: RunStats,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridCellDoc {
    endpoint_id: String,
    transform_id: String,
    scores: MetricScores,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionDoc {
    endpoint_id: String,
    transform_id: String,
    sample_id: String,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunDocument {
    schema_version: u32,
    harness_version: String,
    config_echo: ConfigEcho,
    endpoints: Vec<String>,
    transforms: Vec<String>,
    grid: Vec<GridCellDoc>,
    #[serde(default)]
    predictions: Vec<PredictionDoc>,
    #[serde(default)]
    failures: Vec<FailureRecord>,
}

impl RunResult {
    pub fn scores(&self, endpoint_id: &str, transform_id: &str) -> Option<&MetricScores> {
        self.grid.get(&(endpoint_id.to_string(), transform_id.to_string()))
    }

    /// Serialize the canonical run document. Byte-identical for equal grids
    /// regardless of parallelism or cache state: volatile prediction fields
    /// (latency, retry count, cache flag) are omitted.
    pub fn to_canonical_json(&self) -> Vec<u8> {
        let doc = RunDocument {
            schema_version: RUN_SCHEMA_VERSION,
            harness_version: crate::HARNESS_VERSION.to_string(),
            config_echo: self.config_echo.clone(),
            endpoints: self.endpoint_order.clone(),
            transforms: self.transform_order.clone(),
            grid: self
                .cells()
                .map(|(e, t, s)| GridCellDoc {
                    endpoint_id: e.to_string(),
                    transform_id: t.to_string(),
                    scores: *s,
                })
                .collect(),
            predictions: self
                .predictions
                .iter()
                .map(|p| PredictionDoc {
                    endpoint_id: p.endpoint_id.clone(),
                    transform_id: p.transform_id.clone(),
                    sample_id: p.sample_id.clone(),
                    text: p.text.clone(),
                })
                .collect(),
            failures: self.failures.clone(),
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("run document serializes");
        bytes.push(b'\n');
        bytes
    }

    /// Load a canonical run document (also accepts hand-written scores
    /// fixtures: predictions and failures may be absent).
    pub fn from_canonical_json(bytes: &[u8], origin: &str) -> Result<Self, RunError> {
        let doc: RunDocument = serde_json::from_slice(bytes).map_err(|e| RunError::Document {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let mut grid = BTreeMap::new();
        for cell in doc.grid {
            grid.insert((cell.endpoint_id, cell.transform_id), cell.scores);
        }
        Ok(RunResult {
            endpoint_order: doc.endpoints,
            transform_order: doc.transforms,
            grid,
            predictions: doc
                .predictions
                .into_iter()
                .map(|p| Prediction {
                    endpoint_id: p.endpoint_id,
                    transform_id: p.transform_id,
                    sample_id: p.sample_id,
                    text: p.text,
                    latency_ms: 0,
                    retries: 0,
                    from_cache: false,
                })
                .collect(),
            failures: doc.failures,
            config_echo: doc.config_echo,
            stats: RunStats::default(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| RunError::Document {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_canonical_json(&bytes, &path.display().to_string())
    }

    /// Grid cells in canonical (endpoint-major, transform order) iteration.
    pub fn cells(&self) -> impl Iterator<Item = (&str, &str, &MetricScores)> {
        self.endpoint_order.iter().flat_map(move |e| {
            self.transform_order.iter().filter_map(move |t| {
                self.grid
                    .get(&(e.clone(), t.clone()))
                    .map(|s| (e.as_str(), t.as_str(), s))
            })
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0x1f]);
        }
        hasher.update(part);
    }
    hex(&hasher.finalize())
}

struct LoadedImage {
    digest: String,
    raster: Arc<Raster>,
}

fn load_images(manifest: &DatasetManifest) -> Result<HashMap<String, LoadedImage>, RunError> {
    let mut images = HashMap::new();
    for sample in manifest.samples() {
        if images.contains_key(&sample.image_ref) {
            continue;
        }
        let path = manifest.image_path(sample);
        let bytes = std::fs::read(&path)
            .map_err(|source| RunError::ImageRead { path: path.clone(), source })?;
        let format = InputFormat::from_path(&path)
            .ok_or_else(|| RunError::ImageFormat { path: path.clone() })?;
        let raster = imageops::decode(&bytes, format)
            .map_err(|source| RunError::ImageDecode { path: path.clone(), source })?;
        images.insert(
            sample.image_ref.clone(),
            LoadedImage { digest: sha256_hex(&[&bytes]), raster: Arc::new(raster) },
        );
    }
    Ok(images)
}

/// Claim-by-index work distribution across a bounded worker pool.
fn for_each_parallel<T: Send + Sync, R: Send>(
    items: &[T],
    workers: usize,
    stop: &AtomicBool,
    f: impl Fn(&T) -> R + Send + Sync,
) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(items.len().max(1)) {
            let tx = tx.clone();
            let next = &next;
            let f = &f;
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= items.len() {
                    break;
                }
                if tx.send(f(&items[idx])).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    rx.into_iter().collect()
}

struct WorkItem {
    endpoint_idx: usize,
    transform_idx: usize,
    sample_idx: usize,
    cache_key: String,
}

fn validate_plan(plan: &EvaluationPlan) -> Result<(), RunError> {
    if plan.endpoints.is_empty() {
        return Err(RunError::NoEndpoints);
    }
    let mut seen = std::collections::HashSet::new();
    for endpoint in &plan.endpoints {
        if !seen.insert(&endpoint.id) {
            return Err(RunError::DuplicateEndpointId(endpoint.id.clone()));
        }
    }
    if plan.parallelism == 0 {
        return Err(RunError::BadParallelism);
    }
    if plan.test_set.is_empty() {
        return Err(RunError::EmptyTestSet);
    }
    // TransformSet construction already guarantees identity-first and
    // unique ids.
    Ok(())
}

/// Run the full (endpoint x transform x sample) grid.
pub fn run(plan: &EvaluationPlan) -> Result<RunResult, RunError> {
    validate_plan(plan)?;
    std::fs::create_dir_all(&plan.cache_dir)
        .map_err(|source| RunError::CacheDir { path: plan.cache_dir.clone(), source })?;

    let images = load_images(&plan.test_set)?;

    // Transformed rasters, one per (transform, image), shared by every endpoint.
    let transform_ids = plan.transforms.ids();
    let image_refs: Vec<&str> = plan.test_set.image_refs();
    let transform_jobs: Vec<(usize, &str)> = (0..plan.transforms.len())
        .flat_map(|t| image_refs.iter().map(move |r| (t, *r)))
        .collect();
    let no_stop = AtomicBool::new(false);
    let transformed: HashMap<(usize, String), Arc<Raster>> =
        for_each_parallel(&transform_jobs, plan.parallelism, &no_stop, |(t_idx, image_ref)| {
            let raster = &images[*image_ref].raster;
            let out = imageops::apply(raster, &plan.transforms.transforms()[*t_idx]);
            ((*t_idx, image_ref.to_string()), Arc::new(out))
        })
        .into_iter()
        .collect();

    // Clients are constructed up front so missing API keys and invalid
    // configs surface before any request is sent.
    let clients: Vec<ModelClient> = plan
        .endpoints
        .iter()
        .map(ModelClient::from_endpoint)
        .collect::<Result<Vec<_>, _>>()?;

    let fingerprints: Vec<String> = plan
        .endpoints
        .iter()
        .map(|e| {
            let kind_json = serde_json::to_vec(&e.kind).expect("endpoint config serializes");
            sha256_hex(&[&kind_json])
        })
        .collect();

    let samples = plan.test_set.samples();
    let items: Vec<WorkItem> = (0..plan.endpoints.len())
        .flat_map(|e| {
            (0..plan.transforms.len()).flat_map(move |t| (0..samples.len()).map(move |s| (e, t, s)))
        })
        .map(|(e, t, s)| {
            let sample = &samples[s];
            let cache_key = sha256_hex(&[
                plan.endpoints[e].id.as_bytes(),
                fingerprints[e].as_bytes(),
                transform_ids[t].as_bytes(),
                sample.id.as_bytes(),
                sample.question.as_bytes(),
                images[&sample.image_ref].digest.as_bytes(),
            ]);
            WorkItem { endpoint_idx: e, transform_idx: t, sample_idx: s, cache_key }
        })
        .collect();

    let stop = AtomicBool::new(false);
    let strict = plan.failure_policy == FailurePolicy::Strict;
    let hits = AtomicUsize::new(0);
    let misses = AtomicUsize::new(0);
    let calls = AtomicUsize::new(0);

    let outcomes = for_each_parallel(&items, plan.parallelism, &stop, |item| {
        let sample = &samples[item.sample_idx];
        let endpoint_id = &plan.endpoints[item.endpoint_idx].id;
        let transform_id = &transform_ids[item.transform_idx];
        let cache_path = plan.cache_dir.join(format!("{}.json", item.cache_key));

        if let Some(mut prediction) = read_cached(&cache_path) {
            prediction.from_cache = true;
            hits.fetch_add(1, Ordering::Relaxed);
            return (item.endpoint_idx, item.transform_idx, Ok(prediction));
        }
        misses.fetch_add(1, Ordering::Relaxed);
        calls.fetch_add(1, Ordering::Relaxed);

        let raster = &transformed[&(item.transform_idx, sample.image_ref.clone())];
        let result = clients[item.endpoint_idx].predict(sample, raster, transform_id);
        match result {
            Ok(prediction) => {
                if let Err(source) = publish_cached(&cache_path, &prediction) {
                    if strict {
                        stop.store(true, Ordering::Relaxed);
                    }
                    let failure = FailureRecord {
                        endpoint_id: endpoint_id.clone(),
                        transform_id: transform_id.clone(),
                        sample_id: sample.id.clone(),
                        error: format!("cache write failed: {source}"),
                    };
                    return (item.endpoint_idx, item.transform_idx, Err(failure));
                }
                (item.endpoint_idx, item.transform_idx, Ok(prediction))
            }
            Err(err) => {
                if strict {
                    stop.store(true, Ordering::Relaxed);
                }
                let failure = FailureRecord {
                    endpoint_id: endpoint_id.clone(),
                    transform_id: transform_id.clone(),
                    sample_id: sample.id.clone(),
                    error: err.to_string(),
                };
                (item.endpoint_idx, item.transform_idx, Err(failure))
            }
        }
    });

    let mut predictions: Vec<(usize, usize, Prediction)> = Vec::new();
    let mut failures: Vec<FailureRecord> = Vec::new();
    for (e, t, outcome) in outcomes {
        match outcome {
            Ok(p) => predictions.push((e, t, p)),
            Err(f) => failures.push(f),
        }
    }
    failures.sort();

    if strict {
        if let Some(first) = failures.first() {
            return Err(RunError::Aborted {
                endpoint_id: first.endpoint_id.clone(),
                sample_id: first.sample_id.clone(),
                transform_id: first.transform_id.clone(),
                message: first.error.clone(),
            });
        }
    }

    // Deterministic fold: id-sorted within each cell, cells in grid order.
    predictions.sort_by(|a, b| {
        (a.0, a.1, &a.2.sample_id).cmp(&(b.0, b.1, &b.2.sample_id))
    });

    let mut by_cell: HashMap<(usize, usize), Vec<&Prediction>> = HashMap::new();
    for (e, t, p) in &predictions {
        by_cell.entry((*e, *t)).or_default().push(p);
    }
    let answers: HashMap<&str, &QASample> =
        samples.iter().map(|s| (s.id.as_str(), s)).collect();

    let mut grid = BTreeMap::new();
    for e in 0..plan.endpoints.len() {
        for (t, transform_id) in transform_ids.iter().enumerate() {
            let cell = by_cell.get(&(e, t)).map(Vec::as_slice).unwrap_or(&[]);
            let pairs: Vec<_> = cell
                .iter()
                .map(|p| {
                    let gold = &answers[p.sample_id.as_str()].answer;
                    (tokenize(&p.text, &plan.tokenizer), tokenize(gold, &plan.tokenizer))
                })
                .collect();
            // A cell can only be empty under the skip policy when every
            // sample failed; report zeros alongside the failure records.
            let scores = if pairs.is_empty() {
                MetricScores { bleu: 0.0, rouge1_f: 0.0, rouge2_f: 0.0 }
            } else {
                score_pairs(&pairs)?
            };
            grid.insert((plan.endpoints[e].id.clone(), transform_id.clone()), scores);
        }
    }

    let config_echo = ConfigEcho {
        metric_variant: METRIC_VARIANT.to_string(),
        transform_conventions: crate::imageops::TRANSFORM_CONVENTIONS.to_string(),
        tokenizer: Some(plan.tokenizer.clone()),
        endpoints: plan.endpoints.clone(),
        transforms: transform_ids.clone(),
        failure_policy: plan.failure_policy,
        dataset_digest: plan.test_set.digest(),
        dataset_samples: plan.test_set.len(),
        dataset_provenance: plan.test_set.provenance().cloned(),
    };

    Ok(RunResult {
        endpoint_order: plan.endpoints.iter().map(|e| e.id.clone()).collect(),
        transform_order: transform_ids,
        grid,
        predictions: predictions.into_iter().map(|(_, _, p)| p).collect(),
        failures,
        config_echo,
        stats: RunStats {
            cache_hits: hits.load(Ordering::Relaxed),
            cache_misses: misses.load(Ordering::Relaxed),
            endpoint_calls: calls.load(Ordering::Relaxed),
        },
    })
}

fn read_cached(path: &Path) -> Option<Prediction> {
    let bytes = std::fs::read(path).ok()?;
    serde_json::from_slice(&bytes).ok()
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Single-writer-per-key atomic publish: write a unique temp file, then
/// rename over the final name.
fn publish_cached(path: &Path, prediction: &Prediction) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let unique = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = dir.join(format!(
        ".tmp-{}-{}-{}",
        std::process::id(),
        unique,
        path.file_name().and_then(|n| n.to_str()).unwrap_or("entry")
    ));
    let json = serde_json::to_vec(prediction).expect("prediction serializes");
    std::fs::write(&tmp, json)?;
    std::fs::rename(&tmp, path)
}

// --- gap analysis ----------------------------------------------------------------

/// Signed per-metric deltas (gaps can be negative, unlike raw scores).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub bleu: f64,
    pub rouge1_f: f64,
    pub rouge2_f: f64,
}

impl MetricTriple {
    pub fn get(&self, metric: MetricKind) -> f64 {
        match metric {
            MetricKind::Bleu => self.bleu,
            MetricKind::Rouge1 => self.rouge1_f,
            MetricKind::Rouge2 => self.rouge2_f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub transform_id: String,
    pub distance: f64,
}

/// Contamination-gap and distance-to-target analysis over a run.
///
/// The target is the clean endpoint's identity-transform score: the
/// uncontaminated model on unaugmented data. Transform rankings are by
/// ascending distance to that target, ties broken by canonical transform
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub clean_id: String,
    pub contaminated_id: String,
    pub target: MetricScores,
    pub transforms: Vec<String>,
    pub gaps: BTreeMap<String, BTreeMap<String, MetricTriple>>,
    pub distances: BTreeMap<String, BTreeMap<String, MetricTriple>>,
    pub rankings: BTreeMap<String, BTreeMap<String, Vec<RankEntry>>>,
}

pub fn compare(
    run: &RunResult,
    clean_id: &str,
    contaminated_id: &str,
) -> Result<GapReport, RunError> {
    for id in [clean_id, contaminated_id] {
        if !run.endpoint_order.iter().any(|e| e == id) {
            return Err(RunError::UnknownEndpoint(id.to_string()));
        }
    }
    let target = *run
        .scores(clean_id, "id")
        .ok_or_else(|| RunError::UnknownEndpoint(format!("{clean_id} (identity cell)")))?;

    let mut gaps = BTreeMap::new();
    let mut distances = BTreeMap::new();
    let mut rankings = BTreeMap::new();

    for endpoint in [clean_id, contaminated_id] {
        let mut endpoint_gaps = BTreeMap::new();
        let mut endpoint_distances = BTreeMap::new();
        for transform in &run.transform_order {
            let Some(scores) = run.scores(endpoint, transform) else { continue };
            endpoint_gaps.insert(
                transform.clone(),
                MetricTriple {
                    bleu: scores.bleu - target.bleu,
                    rouge1_f: scores.rouge1_f - target.rouge1_f,
                    rouge2_f: scores.rouge2_f - target.rouge2_f,
                },
            );
            endpoint_distances.insert(
                transform.clone(),
                MetricTriple {
                    bleu: (scores.bleu - target.bleu).abs(),
                    rouge1_f: (scores.rouge1_f - target.rouge1_f).abs(),
                    rouge2_f: (scores.rouge2_f - target.rouge2_f).abs(),
                },
            );
        }

        let mut per_metric = BTreeMap::new();
        for metric in MetricKind::ALL {
            let mut entries: Vec<(usize, RankEntry)> = run
                .transform_order
                .iter()
                .enumerate()
                .filter_map(|(idx, t)| {
                    endpoint_distances.get(t).map(|d| {
                        (idx, RankEntry { transform_id: t.clone(), distance: d.get(metric) })
                    })
                })
                .collect();
            entries.sort_by(|a, b| {
                a.1.distance
                    .partial_cmp(&b.1.distance)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            per_metric
                .insert(metric.name().to_string(), entries.into_iter().map(|(_, e)| e).collect());
        }

        gaps.insert(endpoint.to_string(), endpoint_gaps);
        distances.insert(endpoint.to_string(), endpoint_distances);
        rankings.insert(endpoint.to_string(), per_metric);
    }

    Ok(GapReport {
        clean_id: clean_id.to_string(),
        contaminated_id: contaminated_id.to_string(),
        target,
        transforms: run.transform_order.clone(),
        gaps,
        distances,
        rankings,
    })
}
