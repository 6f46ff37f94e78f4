//! Subcommand implementations. Each returns `CmdError` variants that map to
//! the documented exit codes: usage 1, runtime 2, strict-policy abort 3.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use augeval_core::dataset::{
    self, inject_contamination, load_manifest, save_manifest, ContaminationSpec, SplitSpec,
};
use augeval_core::imageops::TransformSet;
use augeval_core::report::{emit, ReportFormat};
use augeval_core::runner::{compare, run, EvaluationPlan, FailurePolicy, RunError, RunResult};
use augeval_core::selftest;

use crate::config::HarnessConfig;

#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Runtime(anyhow::Error),
    StrictAbort(String),
}

impl From<anyhow::Error> for CmdError {
    fn from(err: anyhow::Error) -> Self {
        CmdError::Runtime(err)
    }
}

type CmdResult = Result<(), CmdError>;

fn usage(message: impl Into<String>) -> CmdError {
    CmdError::Usage(message.into())
}

/// Refuse to clobber existing outputs unless --overwrite was given.
fn ensure_writable(paths: &[PathBuf], overwrite: bool) -> CmdResult {
    if overwrite {
        return Ok(());
    }
    for path in paths {
        if path.exists() {
            return Err(CmdError::Runtime(anyhow!(
                "output {} already exists (pass --overwrite to replace it)",
                path.display()
            )));
        }
    }
    Ok(())
}

pub fn cmd_split(
    manifest_path: &Path,
    train_fraction: f64,
    seed: u64,
    out_dir: &Path,
    overwrite: bool,
) -> CmdResult {
    let spec = SplitSpec::new(train_fraction, seed).map_err(|e| usage(e.to_string()))?;
    let manifest = load_manifest(manifest_path)
        .with_context(|| format!("loading {}", manifest_path.display()))?;
    let (train, test) = match dataset::split(&manifest, &spec) {
        Ok(parts) => parts,
        Err(e @ dataset::DatasetError::DegenerateSplit { .. }) => {
            return Err(usage(e.to_string()))
        }
        Err(e) => return Err(CmdError::Runtime(e.into())),
    };

    let train_path = out_dir.join("train.jsonl");
    let test_path = out_dir.join("test.jsonl");
    ensure_writable(&[train_path.clone(), test_path.clone()], overwrite)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    save_manifest(&train, &train_path).map_err(anyhow::Error::from)?;
    save_manifest(&test, &test_path).map_err(anyhow::Error::from)?;

    println!(
        "split {} samples over {} images into train {} ({} images) / test {} ({} images)",
        manifest.len(),
        manifest.image_refs().len(),
        train.len(),
        train.image_refs().len(),
        test.len(),
        test.image_refs().len(),
    );
    println!("wrote {}", train_path.display());
    println!("wrote {}", test_path.display());
    Ok(())
}

pub fn cmd_contaminate(
    train_path: &Path,
    test_path: &Path,
    replacement_fraction: f64,
    seed: u64,
    out_path: &Path,
    overwrite: bool,
) -> CmdResult {
    let spec =
        ContaminationSpec::new(replacement_fraction, seed).map_err(|e| usage(e.to_string()))?;
    let train =
        load_manifest(train_path).with_context(|| format!("loading {}", train_path.display()))?;
    let test =
        load_manifest(test_path).with_context(|| format!("loading {}", test_path.display()))?;
    let contaminated = match inject_contamination(&train, &test, &spec) {
        Ok(manifest) => manifest,
        Err(e @ dataset::DatasetError::BadReplacementCount { .. }) => {
            return Err(usage(e.to_string()))
        }
        Err(e) => return Err(CmdError::Runtime(e.into())),
    };

    ensure_writable(&[out_path.to_path_buf()], overwrite)?;
    if let Some(parent) = out_path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    save_manifest(&contaminated, out_path).map_err(anyhow::Error::from)?;

    let injected = contaminated
        .provenance()
        .and_then(|p| p.injected_ids.as_ref())
        .map(|ids| ids.join(", "))
        .unwrap_or_default();
    println!(
        "replaced {} of {} training samples with test samples (seed {seed})",
        contaminated.provenance().and_then(|p| p.injected_ids.as_ref()).map_or(0, Vec::len),
        train.len(),
    );
    println!("injected ids: {injected}");
    println!("wrote {}", out_path.display());
    Ok(())
}

pub struct EvaluateFlags {
    pub parallelism: Option<usize>,
    pub failure_policy: Option<FailurePolicy>,
    pub format: Option<String>,
    pub dry_run: bool,
    pub overwrite: bool,
}

fn parse_formats(spec: &str) -> Result<Vec<ReportFormat>, CmdError> {
    match spec {
        "all" => Ok(ReportFormat::ALL.to_vec()),
        "json" => Ok(vec![ReportFormat::Json]),
        "csv" => Ok(vec![ReportFormat::Csv]),
        "markdown" => Ok(vec![ReportFormat::Markdown]),
        other => Err(usage(format!(
            "unknown format {other:?} (expected json, csv, markdown, or all)"
        ))),
    }
}

pub fn cmd_evaluate(config_path: &Path, flags: EvaluateFlags) -> CmdResult {
    let config = HarnessConfig::load(config_path).map_err(CmdError::Runtime)?;
    let parallelism = flags.parallelism.unwrap_or(config.run.parallelism);
    if parallelism == 0 {
        return Err(usage("--parallelism must be >= 1"));
    }
    let failure_policy = flags.failure_policy.unwrap_or(config.run.failure_policy);
    let formats = parse_formats(flags.format.as_deref().unwrap_or(&config.run.formats))?;

    let transforms = TransformSet::from_ids(&config.run.transforms)
        .map_err(|e| usage(format!("invalid transform list: {e}")))?;
    if config.endpoints.is_empty() {
        return Err(usage("config declares no endpoints"));
    }

    let test_set = load_manifest(&config.dataset.manifest)
        .with_context(|| format!("loading {}", config.dataset.manifest.display()))?;

    if flags.dry_run {
        println!(
            "dry run: {} endpoint(s) x {} transform(s) x {} sample(s) = {} predictions",
            config.endpoints.len(),
            transforms.len(),
            test_set.len(),
            config.endpoints.len() * transforms.len() * test_set.len(),
        );
        println!("endpoints:  {}", ids(&config.endpoints));
        println!("transforms: {}", transforms.ids().join(", "));
        println!("policy: {failure_policy:?}, parallelism: {parallelism}");
        return Ok(());
    }

    let out_dir = &config.run.out_dir;
    let run_result_path = out_dir.join("run_result.json");
    let mut outputs = vec![run_result_path.clone()];
    if config.report.is_some() {
        for format in &formats {
            outputs.push(out_dir.join(format!("report.{}", format.extension())));
        }
    }
    ensure_writable(&outputs, flags.overwrite)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let plan = EvaluationPlan {
        endpoints: config.endpoints,
        transforms,
        test_set,
        cache_dir: config.run.cache_dir.clone(),
        parallelism,
        tokenizer: config.tokenizer,
        failure_policy,
    };
    let result = match run(&plan) {
        Ok(result) => result,
        Err(e @ RunError::Aborted { .. }) => return Err(CmdError::StrictAbort(e.to_string())),
        Err(e) => return Err(CmdError::Runtime(e.into())),
    };

    std::fs::write(&run_result_path, result.to_canonical_json())
        .with_context(|| format!("writing {}", run_result_path.display()))?;
    println!("wrote {}", run_result_path.display());

    if let Some(report_cfg) = &config.report {
        let gap = compare(&result, &report_cfg.clean, &report_cfg.contaminated)
            .map_err(|e| CmdError::Runtime(e.into()))?;
        for format in formats {
            let bytes = emit(&result, &gap, format).map_err(anyhow::Error::from)?;
            let path = out_dir.join(format!("report.{}", format.extension()));
            std::fs::write(&path, bytes)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
    }

    println!(
        "evaluated {} cells ({} predictions, {} cache hits, {} failures)",
        result.grid.len(),
        result.predictions.len(),
        result.stats.cache_hits,
        result.failures.len(),
    );
    Ok(())
}

fn ids(endpoints: &[augeval_core::models::ModelEndpoint]) -> String {
    endpoints.iter().map(|e| e.id.as_str()).collect::<Vec<_>>().join(", ")
}

pub fn cmd_report(
    run_path: &Path,
    clean: &str,
    contaminated: &str,
    out_dir: &Path,
    format: &str,
    overwrite: bool,
) -> CmdResult {
    let formats = parse_formats(format)?;
    let result = RunResult::load(run_path).map_err(|e| CmdError::Runtime(e.into()))?;
    let gap = compare(&result, clean, contaminated).map_err(|e| CmdError::Runtime(e.into()))?;

    let outputs: Vec<PathBuf> = formats
        .iter()
        .map(|f| out_dir.join(format!("report.{}", f.extension())))
        .collect();
    ensure_writable(&outputs, overwrite)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    for (format, path) in formats.iter().zip(&outputs) {
        let bytes = emit(&result, &gap, *format).map_err(anyhow::Error::from)?;
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn cmd_selftest(golden_dir: Option<&Path>) -> CmdResult {
    let suites = selftest::run_all(golden_dir);
    let mut failed = Vec::new();
    for suite in &suites {
        let total = suite.passed + suite.failed;
        if suite.ok() {
            println!("suite {}: {}/{} checks passed", suite.name, suite.passed, total);
        } else {
            println!("suite {}: {}/{} checks passed, FAILED", suite.name, suite.passed, total);
            for failure in &suite.failures {
                println!("  {failure}");
            }
            failed.push(suite.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CmdError::Runtime(anyhow!("selftest failed: {}", failed.join(", "))))
    }
}
