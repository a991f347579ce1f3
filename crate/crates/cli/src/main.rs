//! `readiness`: score research repositories for reproducibility readiness.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "readiness", version, about = "Static reproducibility-readiness scoring for research repositories")]
struct Cli {
    /// Rubric YAML file, or the name of a bundled rubric (default, bioinformatics-v1).
    #[arg(long, global = true, env = "RRS_RUBRIC", value_name = "PATH")]
    rubric: Option<String>,

    /// Write the main output here instead of stdout (a directory for `batch`).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score one repository (local path or git URL) and emit its provenance record.
    Score {
        source: String,
        /// Directory with pattern-list overrides.
        #[arg(long, value_name = "DIR")]
        patterns: Option<PathBuf>,
        /// Clone full history instead of a shallow clone.
        #[arg(long)]
        full_clone: bool,
    },
    /// Score every source listed in a file, one per line.
    Batch {
        list: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
        #[arg(long, value_name = "DIR")]
        patterns: Option<PathBuf>,
    },
    /// Attach execution evidence to a provenance record.
    Compose { record: PathBuf, evidence: PathBuf },
    /// Check a rubric file.
    RubricValidate { path: PathBuf },
    /// Rescore a provenance record under --rubric without re-acquiring the repository.
    Recompute { record: PathBuf },
    /// Corpus diagnostics over a provenance directory and a label CSV.
    Stats {
        corpus_dir: PathBuf,
        labels: PathBuf,
        /// Comma-separated: kw, pb, pairwise, submetrics, auc, perturbation, loco, grid, modes, all.
        #[arg(long, default_value = "all")]
        analyses: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = readiness_core::stats::DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long, default_value_t = 0.5)]
        span: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Proxy execution evidence from a failure-mode label and notebook counts.
    Proxy {
        label: String,
        /// Notebooks that ran without error.
        success: u64,
        /// Notebooks executed.
        total: u64,
    },
    /// Output determinism between two directories of executed notebooks.
    Determinism { run_a: PathBuf, run_b: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context { rubric: cli.rubric, out: cli.out, format: cli.format };
    let result = match cli.command {
        Command::Score { source, patterns, full_clone } => commands::score(&ctx, &source, patterns.as_deref(), !full_clone),
        Command::Batch { list, jobs, patterns } => commands::batch(&ctx, &list, jobs as usize, patterns.as_deref()),
        Command::Compose { record, evidence } => commands::compose(&ctx, &record, &evidence),
        Command::RubricValidate { path } => commands::rubric_validate(&ctx, &path),
        Command::Recompute { record } => commands::recompute(&ctx, &record),
        Command::Stats { corpus_dir, labels, analyses, seed, resamples, span, steps } => {
            commands::stats(&ctx, &corpus_dir, &labels, &analyses, seed, resamples, span, steps)
        }
        Command::Proxy { label, success, total } => commands::proxy(&ctx, &label, success, total),
        Command::Determinism { run_a, run_b } => commands::determinism(&ctx, &run_a, &run_b),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { kind, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(kind.code())
        }
    }
}
