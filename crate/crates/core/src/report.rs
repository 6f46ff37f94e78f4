//! Render a run plus its gap analysis as JSON (canonical, full precision),
//! CSV (flattened grid), or Markdown (human-readable tables with a target
//! row and gap direction markers). Emission is pure: equal inputs always
//! produce identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::MetricKind;
use crate::runner::{GapReport, RunResult, RUN_SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("gap report references endpoint {0:?} that is not in the run")]
    MismatchedEndpoint(String),
    #[error("gap report transform list does not match the run's transforms")]
    MismatchedTransforms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] =
        [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown];

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

/// Numbers in the human-readable formats are printed with 4 decimal places;
/// the JSON form retains full precision.
fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

fn validate(run: &RunResult, gap: &GapReport) -> Result<(), ReportError> {
    for id in [&gap.clean_id, &gap.contaminated_id] {
        if !run.endpoint_order.contains(id) {
            return Err(ReportError::MismatchedEndpoint(id.clone()));
        }
    }
    if gap.transforms != run.transform_order {
        return Err(ReportError::MismatchedTransforms);
    }
    Ok(())
}

/// Emit the consistent (run, gap) pair in the requested format.
pub fn emit(run: &RunResult, gap: &GapReport, format: ReportFormat) -> Result<Vec<u8>, ReportError> {
    validate(run, gap)?;
    Ok(match format {
        ReportFormat::Json => emit_json(run, gap),
        ReportFormat::Csv => emit_csv(run).into_bytes(),
        ReportFormat::Markdown => emit_markdown(run, gap).into_bytes(),
    })
}

fn emit_json(run: &RunResult, gap: &GapReport) -> Vec<u8> {
    let run_doc: serde_json::Value =
        serde_json::from_slice(&run.to_canonical_json()).expect("canonical run document parses");
    let doc = serde_json::json!({
        "schema_version": RUN_SCHEMA_VERSION,
        "harness_version": crate::HARNESS_VERSION,
        "run": run_doc,
        "gap": gap,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("report document serializes");
    bytes.push(b'\n');
    bytes
}

fn emit_csv(run: &RunResult) -> String {
    let mut out = String::from("endpoint,transform,bleu,rouge1_f,rouge2_f\n");
    for (endpoint, transform, scores) in run.cells() {
        let _ = writeln!(
            out,
            "{endpoint},{transform},{},{},{}",
            fmt4(scores.bleu),
            fmt4(scores.rouge1_f),
            fmt4(scores.rouge2_f)
        );
    }
    out
}

/// Direction marker for a cell relative to the target score.
fn marker(score: f64, target: f64) -> &'static str {
    if score > target {
        " ↑"
    } else if score < target {
        " ↓"
    } else {
        ""
    }
}

fn emit_markdown(run: &RunResult, gap: &GapReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Clean-evaluation report\n");
    let _ = writeln!(out, "- harness version: {}", crate::HARNESS_VERSION);
    let echo = &run.config_echo;
    if !echo.metric_variant.is_empty() {
        let _ = writeln!(out, "- metric variant: {}", echo.metric_variant);
    }
    if !echo.transform_conventions.is_empty() {
        let _ = writeln!(out, "- transform conventions: {}", echo.transform_conventions);
    }
    if !echo.dataset_digest.is_empty() {
        let _ = writeln!(
            out,
            "- dataset: {} samples, digest {}",
            echo.dataset_samples, echo.dataset_digest
        );
    }
    let _ = writeln!(
        out,
        "- target performance: clean endpoint `{}` on untransformed inputs",
        gap.clean_id
    );

    // Score grid, one row per transform, a target row on top. Cells carry a
    // direction marker against the target for that metric.
    let _ = writeln!(out, "\n## Score grid\n");
    let mut header = String::from("| Transform |");
    let mut rule = String::from("|---|");
    for endpoint in &run.endpoint_order {
        for metric in MetricKind::ALL {
            let _ = write!(header, " {} {} |", endpoint, metric.label());
            rule.push_str("---|");
        }
    }
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{rule}");

    let mut target_row = String::from("| target |");
    for _ in &run.endpoint_order {
        for metric in MetricKind::ALL {
            let _ = write!(target_row, " {} |", fmt4(gap.target.get(metric)));
        }
    }
    let _ = writeln!(out, "{target_row}");

    for transform in &run.transform_order {
        let mut row = format!("| {transform} |");
        for endpoint in &run.endpoint_order {
            for metric in MetricKind::ALL {
                match run.scores(endpoint, transform) {
                    Some(scores) => {
                        let value = scores.get(metric);
                        let _ = write!(
                            row,
                            " {}{} |",
                            fmt4(value),
                            marker(value, gap.target.get(metric))
                        );
                    }
                    None => {
                        let _ = write!(row, " - |");
                    }
                }
            }
        }
        let _ = writeln!(out, "{row}");
    }

    // Contamination inflation at the identity transform.
    let _ = writeln!(out, "\n## Contamination inflation (identity transform)\n");
    let _ = writeln!(out, "| Endpoint | Role | BLEU | ROUGE-1 | ROUGE-2 |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    for (endpoint, role) in [(&gap.clean_id, "clean"), (&gap.contaminated_id, "contaminated")] {
        if let Some(scores) = run.scores(endpoint, "id") {
            let mut row = format!("| {endpoint} | {role} |");
            for metric in MetricKind::ALL {
                let value = scores.get(metric);
                let _ = write!(row, " {}{} |", fmt4(value), marker(value, gap.target.get(metric)));
            }
            let _ = writeln!(out, "{row}");
        }
    }

    // Ranking section is omitted for the degenerate identity-only grid.
    if run.transform_order.len() > 1 {
        let _ = writeln!(out, "\n## Transforms ranked by distance to target\n");
        let _ = writeln!(out, "| Endpoint | Metric | Ranking (ascending distance) |");
        let _ = writeln!(out, "|---|---|---|");
        for endpoint in [&gap.clean_id, &gap.contaminated_id] {
            let Some(per_metric) = gap.rankings.get(endpoint) else { continue };
            for metric in MetricKind::ALL {
                let Some(entries) = per_metric.get(metric.name()) else { continue };
                let ranking = entries
                    .iter()
                    .map(|e| format!("{} ({})", e.transform_id, fmt4(e.distance)))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(out, "| {endpoint} | {} | {ranking} |", metric.label());
            }
        }
    }
    out
}
