//! Contamination-aware evaluation harness for vision-language models.
//!
//! The crate is organized around the stages of a clean-evaluation run:
//!
//! * [`dataset`] — manifest loading, image-level train/test splitting, and
//!   seeded contamination injection.
//! * [`imageops`] — RGB8 rasters and the deterministic transform set
//!   (flips, rotations, BGR channel swap).
//! * [`metrics`] — tokenization plus BLEU / ROUGE-1 / ROUGE-2 scoring.
//! * [`models`] — model endpoints: an OpenAI-compatible vision HTTP client
//!   and deterministic memorizing stub models.
//! * [`runner`] — the (endpoint x transform x sample) evaluation grid with
//!   disk caching and bounded parallelism, plus gap analysis.
//! * [`report`] — JSON / CSV / Markdown emission of run results.

pub mod dataset;
pub mod hashing;
pub mod imageops;
pub mod metrics;
pub mod models;
pub mod report;
pub mod runner;
pub mod selftest;

pub use dataset::{ContaminationSpec, DatasetManifest, QASample, SplitSpec};
pub use imageops::{Raster, Transform, TransformSet};
pub use metrics::{MetricScores, TokenSeq, TokenizerConfig};
pub use models::{EndpointKind, ModelEndpoint, Prediction, RemoteHttpConfig, StubModelConfig};
pub use report::ReportFormat;
pub use runner::{EvaluationPlan, FailurePolicy, GapReport, RunResult};

/// Harness version embedded in every emitted report.
pub const HARNESS_VERSION: &str = env!("CARGO_PKG_VERSION");
