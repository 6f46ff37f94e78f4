//! `augeval` — contamination-aware clean-evaluation workflow for
//! vision-language models.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 run aborted
//! under the strict failure policy.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use augeval_core::runner::FailurePolicy;
use commands::{CmdError, EvaluateFlags};

#[derive(Parser)]
#[command(
    name = "augeval",
    version,
    about = "Evaluate vision-language models under semantics-preserving visual augmentations \
             (flips, rotations, BGR swap) and report contamination gaps against an \
             uncontaminated target."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Strict,
    Skip,
}

impl From<PolicyArg> for FailurePolicy {
    fn from(value: PolicyArg) -> Self {
        match value {
            PolicyArg::Strict => FailurePolicy::Strict,
            PolicyArg::Skip => FailurePolicy::Skip,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split a manifest into image-disjoint train and test manifests.
    Split {
        /// Input manifest (.jsonl).
        #[arg(long)]
        manifest: PathBuf,
        /// Fraction of images assigned to the training side, in (0, 1).
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        #[arg(long)]
        seed: u64,
        /// Directory receiving train.jsonl and test.jsonl.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
    /// Replace seeded-uniformly chosen training samples with test samples,
    /// keeping the training-set size constant.
    Contaminate {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Fraction of the test set injected, in (0, 1].
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        seed: u64,
        /// Output manifest path; its header records the injected ids.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
    /// Run the full (endpoint x transform x sample) evaluation grid from a
    /// TOML config and write the run document plus reports.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's worker count.
        #[arg(long)]
        parallelism: Option<usize>,
        /// Override the config's failure policy.
        #[arg(long)]
        failure_policy: Option<PolicyArg>,
        /// Report formats: json, csv, markdown, or all.
        #[arg(long)]
        format: Option<String>,
        /// Print the resolved grid and exit without predicting.
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        overwrite: bool,
    },
    /// Re-render reports from an existing run document.
    Report {
        /// Path to a run_result.json produced by `evaluate`.
        #[arg(long)]
        run: PathBuf,
        /// Endpoint id of the clean model (defines the target performance).
        #[arg(long)]
        clean: String,
        /// Endpoint id of the contaminated model.
        #[arg(long)]
        contaminated: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value = "all")]
        format: String,
        #[arg(long)]
        overwrite: bool,
    },
    /// Run the transform-algebra and metric-golden health checks.
    Selftest {
        /// Load golden data from this directory instead of the compiled-in
        /// copy.
        #[arg(long)]
        golden_dir: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Split { manifest, train_fraction, seed, out_dir, overwrite } => {
            commands::cmd_split(&manifest, train_fraction, seed, &out_dir, overwrite)
        }
        Command::Contaminate { train, test, fraction, seed, out, overwrite } => {
            commands::cmd_contaminate(&train, &test, fraction, seed, &out, overwrite)
        }
        Command::Evaluate { config, parallelism, failure_policy, format, dry_run, overwrite } => {
            commands::cmd_evaluate(
                &config,
                EvaluateFlags {
                    parallelism,
                    failure_policy: failure_policy.map(Into::into),
                    format,
                    dry_run,
                    overwrite,
                },
            )
        }
        Command::Report { run, clean, contaminated, out_dir, format, overwrite } => {
            commands::cmd_report(&run, &clean, &contaminated, &out_dir, &format, overwrite)
        }
        Command::Selftest { golden_dir } => commands::cmd_selftest(golden_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(1)
        }
        Err(CmdError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(CmdError::StrictAbort(message)) => {
            eprintln!("aborted: {message}");
            ExitCode::from(3)
        }
    }
}
