use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use rayon::prelude::*;
use readiness_core::assess::{assess_snapshot, AssessError};
use readiness_core::provenance::{self, ProvenanceRecord};
use readiness_core::repo::{acquire_repository, scan_directory, FileKind, NotebookModel};
use readiness_core::rubric::{self, RubricError, RubricViolation};
use readiness_core::scoring::determinism::output_determinism;
use readiness_core::scoring::{derive_proxy_evidence, EvidenceDocument, ExecutionEvidence};
use readiness_core::stats::report::Analysis;
use readiness_core::stats::{load_corpus, run_diagnostics, DiagnosticsOptions};
use readiness_core::{Category, DeterminismReport, FailureMode, Patterns, RubricProfile};
use serde::Serialize;

use crate::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Internal,
    Acquisition,
    Rubric,
    Input,
}

impl FailureKind {
    pub fn code(self) -> u8 {
        match self {
            FailureKind::Internal => 1,
            FailureKind::Acquisition => 3,
            FailureKind::Rubric => 4,
            FailureKind::Input => 5,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

type Result<T> = std::result::Result<T, Failure>;

trait Classify<T> {
    fn kind(self, kind: FailureKind) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn kind(self, kind: FailureKind) -> Result<T> {
        self.map_err(|e| Failure { kind, error: e.into() })
    }
}

fn fail<T>(kind: FailureKind, error: anyhow::Error) -> Result<T> {
    Err(Failure { kind, error })
}

pub struct Context {
    pub rubric: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Context {
    /// `--rubric` as a file path, else as a bundled rubric name; the default
    /// profile when unset.
    fn rubric(&self) -> Result<RubricProfile> {
        let Some(spec) = &self.rubric else {
            return Ok(RubricProfile::default_profile());
        };
        let path = Path::new(spec);
        if path.is_file() {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read rubric {}", path.display()))
                .kind(FailureKind::Rubric)?;
            return RubricProfile::from_yaml(&text)
                .with_context(|| format!("rubric {}", path.display()))
                .kind(FailureKind::Rubric);
        }
        rubric::builtin(spec).ok_or_else(|| anyhow!("no rubric file or bundled rubric named `{spec}`")).kind(FailureKind::Rubric)
    }

    /// Writes `text` to `--out` when given, otherwise to stdout.
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => write_file(p, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// JSON or table, per `--format`.
    fn emit_as<T: Serialize>(&self, value: &T, table: impl FnOnce() -> String) -> Result<()> {
        let text = match self.format {
            Format::Json => to_json(value)?,
            Format::Table => table(),
        };
        self.emit(&text)
    }

    /// Record-producing commands: `--out` receives the record; stdout gets
    /// the record (json) or its summary (table).
    fn emit_record(&self, record: &ProvenanceRecord) -> Result<()> {
        let json = record.to_json().kind(FailureKind::Internal)?;
        if let Some(p) = &self.out {
            write_file(p, &json)?;
        }
        match self.format {
            Format::Json if self.out.is_none() => print!("{json}"),
            Format::Json => {}
            Format::Table => print!("{}", record_table(record)),
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).kind(FailureKind::Internal)?;
    let mut s = serde_json::to_string_pretty(&provenance::canonicalize(v)).kind(FailureKind::Internal)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).kind(FailureKind::Internal)?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).kind(FailureKind::Internal)
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).kind(FailureKind::Input)
}

fn read_record(path: &Path) -> Result<ProvenanceRecord> {
    ProvenanceRecord::from_json(&read_input(path)?)
        .with_context(|| format!("provenance record {}", path.display()))
        .kind(FailureKind::Input)
}

fn load_patterns(dir: Option<&Path>) -> Result<Patterns> {
    match dir {
        None => Ok(Patterns::default()),
        Some(d) => Patterns::load_dir(d).with_context(|| format!("pattern overrides in {}", d.display())).kind(FailureKind::Input),
    }
}

fn one(v: f64) -> String {
    format!("{v:.1}")
}

pub fn record_table(r: &ProvenanceRecord) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "repository  {} @ {}", r.repository.repo_id, r.repository.short_commit());
    let _ = writeln!(s, "rubric      {} {}", r.rubric.name, r.rubric.version);
    let _ = writeln!(s, "\nCat  Name                       Raw    Weight  Contribution");
    for c in Category::ALL {
        if let Some(k) = r.categories.get(&c) {
            let na = if k.applicable { "" } else { "  (no applicable sub-metrics)" };
            let _ = writeln!(s, "{:<4} {:<26} {:>5}  {:>6.2}  {:>12}{}", c.symbol(), c.name(), one(k.raw), k.weight, one(k.contribution), na);
        }
    }
    let p = &r.penalties;
    let mut flags = Vec::new();
    if p.environment {
        flags.push("E < 10");
    }
    if p.data {
        flags.push("A < 10");
    }
    let _ = writeln!(s, "\nhard penalty  {}{}", one(p.hard), if flags.is_empty() { String::new() } else { format!(" ({})", flags.join(", ")) });
    let seed_note = match p.sigma {
        None => " (no stochastic code)".to_string(),
        Some(sigma) if p.seed > 0.0 => format!(" (seed management {})", one(sigma)),
        Some(_) => String::new(),
    };
    let _ = writeln!(s, "seed penalty  {}{}", one(p.seed), seed_note);
    let _ = writeln!(s, "RRS           {}", one(r.rrs));
    if let Some(e) = &r.execution {
        let ros = e.ros.map_or("n/a".to_string(), one);
        let _ = writeln!(s, "ROS           {ros}\nalpha         {:.3}\nRCS           {}", e.alpha, one(e.rcs));
    }
    s
}

fn acquisition_kind(e: &AssessError) -> FailureKind {
    match e {
        AssessError::Acquisition(_) => FailureKind::Acquisition,
        AssessError::Scoring(_) => FailureKind::Internal,
    }
}

fn score_source(source: &str, rubric: &RubricProfile, patterns: &Patterns, shallow: bool) -> std::result::Result<ProvenanceRecord, AssessError> {
    let snapshot = acquire_repository(source, shallow)?;
    let assessment = assess_snapshot(&snapshot, rubric, patterns)?;
    Ok(provenance::emit_provenance(&assessment, &snapshot))
}

pub fn score(ctx: &Context, source: &str, patterns: Option<&Path>, shallow: bool) -> Result<()> {
    let rubric = ctx.rubric()?;
    let patterns = load_patterns(patterns)?;
    let record = score_source(source, &rubric, &patterns, shallow).map_err(|e| Failure { kind: acquisition_kind(&e), error: e.into() })?;
    ctx.emit_record(&record)
}

#[derive(Debug, Serialize)]
struct BatchEntry {
    source: String,
    repo_id: String,
    commit_id: String,
    file: String,
    rrs: f64,
}

#[derive(Debug, Serialize)]
struct BatchFailure {
    source: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct BatchSummary {
    scored: usize,
    excluded: usize,
    records: Vec<BatchEntry>,
    failures: Vec<BatchFailure>,
}

/// Non-empty, non-comment lines of a batch list.
pub fn read_sources(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

pub fn batch(ctx: &Context, list: &Path, jobs: usize, patterns: Option<&Path>) -> Result<()> {
    let text = read_input(list)?;
    let sources = read_sources(&text);
    let rubric = ctx.rubric()?;
    let patterns = load_patterns(patterns)?;
    let out_dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("provenance"));
    fs::create_dir_all(&out_dir).with_context(|| format!("cannot create {}", out_dir.display())).kind(FailureKind::Internal)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().kind(FailureKind::Internal)?;
    let results: Vec<_> = pool.install(|| {
        sources
            .par_iter()
            .map(|s| score_source(s, &rubric, &patterns, true).map_err(|e| format!("{e}")))
            .collect()
    });

    let mut summary = BatchSummary { scored: 0, excluded: 0, records: Vec::new(), failures: Vec::new() };
    let mut taken = BTreeSet::new();
    for (source, result) in sources.iter().zip(results) {
        let record = match result {
            Ok(r) => r,
            Err(error) => {
                eprintln!("excluded {source}: {error}");
                summary.failures.push(BatchFailure { source: source.clone(), error });
                continue;
            }
        };
        let name = format!("{}_{}.json", record.repository.repo_id, record.repository.short_commit());
        if !taken.insert(name.clone()) {
            let error = format!("duplicate of an earlier entry ({name})");
            eprintln!("excluded {source}: {error}");
            summary.failures.push(BatchFailure { source: source.clone(), error });
            continue;
        }
        let json = record.to_json().kind(FailureKind::Internal)?;
        write_file(&out_dir.join(&name), &json)?;
        summary.records.push(BatchEntry {
            source: source.clone(),
            repo_id: record.repository.repo_id.clone(),
            commit_id: record.repository.commit_id.clone(),
            file: name,
            rrs: record.rrs,
        });
    }
    summary.scored = summary.records.len();
    summary.excluded = summary.failures.len();
    let text = match ctx.format {
        Format::Json => to_json(&summary)?,
        Format::Table => {
            let mut s = String::new();
            for r in &summary.records {
                let _ = writeln!(s, "{:<40} {:>5}  {}", r.repo_id, one(r.rrs), r.file);
            }
            for f in &summary.failures {
                let _ = writeln!(s, "{:<40} excluded: {}", f.source, f.error);
            }
            let _ = writeln!(s, "scored {}, excluded {} (records in {})", summary.scored, summary.excluded, out_dir.display());
            s
        }
    };
    print!("{text}");
    Ok(())
}

pub fn compose(ctx: &Context, record: &Path, evidence: &Path) -> Result<()> {
    let rec = read_record(record)?;
    let doc: EvidenceDocument = serde_json::from_str(&read_input(evidence)?)
        .with_context(|| format!("evidence document {}", evidence.display()))
        .kind(FailureKind::Input)?;
    let ev = doc.to_evidence().with_context(|| format!("evidence document {}", evidence.display())).kind(FailureKind::Input)?;
    ctx.emit_record(&provenance::compose(&rec, &ev))
}

#[derive(Debug, Serialize)]
struct RubricDiagnostics {
    path: String,
    valid: bool,
    name: Option<String>,
    version: Option<String>,
    /// Parse failure, when the document could not be read as a rubric.
    error: Option<String>,
    violations: Vec<RubricViolation>,
}

pub fn rubric_validate(ctx: &Context, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).kind(FailureKind::Rubric)?;
    let result = RubricProfile::from_yaml(&text);
    let diag = match &result {
        Ok(p) => RubricDiagnostics {
            path: path.display().to_string(),
            valid: true,
            name: Some(p.name.clone()),
            version: Some(p.version.clone()),
            error: None,
            violations: Vec::new(),
        },
        Err(e) => RubricDiagnostics {
            path: path.display().to_string(),
            valid: false,
            name: None,
            version: None,
            error: match e {
                RubricError::Invalid(_) => None,
                other => Some(other.to_string()),
            },
            violations: e.violations().to_vec(),
        },
    };
    ctx.emit_as(&diag, || {
        let mut s = String::new();
        if diag.valid {
            let _ = writeln!(s, "{}: valid ({} {})", diag.path, diag.name.as_deref().unwrap_or(""), diag.version.as_deref().unwrap_or(""));
        } else {
            let _ = writeln!(s, "{}: invalid", diag.path);
            if let Some(e) = &diag.error {
                let _ = writeln!(s, "  {e}");
            }
            for v in &diag.violations {
                let _ = writeln!(s, "  {v}");
            }
        }
        s
    })?;
    match result {
        Ok(_) => Ok(()),
        Err(e) => fail(FailureKind::Rubric, anyhow!(e)),
    }
}

pub fn recompute(ctx: &Context, record: &Path) -> Result<()> {
    let rec = read_record(record)?;
    let rubric = ctx.rubric()?;
    let out = provenance::recompute_from_provenance(&rec, &rubric).kind(FailureKind::Input)?;
    ctx.emit_record(&out)
}

#[allow(clippy::too_many_arguments)]
pub fn stats(
    ctx: &Context,
    corpus_dir: &Path,
    labels: &Path,
    analyses: &str,
    seed: u64,
    resamples: usize,
    span: f64,
    steps: usize,
) -> Result<()> {
    let analyses = Analysis::parse_list(analyses).map_err(|e| anyhow!(e)).kind(FailureKind::Input)?;
    let rubric = ctx.rubric()?;
    let corpus = load_corpus(corpus_dir, labels).kind(FailureKind::Input)?;
    let opts = DiagnosticsOptions { analyses, seed, resamples, span, steps, ..DiagnosticsOptions::default() };
    let report = run_diagnostics(&corpus, &rubric, &opts).kind(FailureKind::Input)?;
    ctx.emit_as(&report, || report.to_table())
}

pub fn proxy(ctx: &Context, label: &str, success: u64, total: u64) -> Result<()> {
    let mode: FailureMode = label.parse().kind(FailureKind::Input)?;
    let ev: ExecutionEvidence<f64> = derive_proxy_evidence(mode, success, total).kind(FailureKind::Input)?;
    let doc = EvidenceDocument::from_evidence(&ev);
    ctx.emit_as(&doc, || {
        let c = &doc.components;
        let f = |v: Option<f64>| v.map_or("n/a".to_string(), one);
        format!(
            "I {}  X {}  N {}  E' {}  (alpha {:.3})\n",
            f(c.install),
            f(c.execution),
            f(c.notebook_rate),
            f(c.import_rate),
            readiness_core::scoring::compute_alpha(&ev)
        )
    })
}

/// Parses every notebook under `dir`, keyed by relative path.
fn load_notebooks(dir: &Path) -> Result<Vec<NotebookModel>> {
    if !dir.is_dir() {
        return fail(FailureKind::Input, anyhow!("{} is not a directory", dir.display()));
    }
    let inv = scan_directory(dir).with_context(|| format!("cannot scan {}", dir.display())).kind(FailureKind::Input)?;
    inv.of_kind(FileKind::Notebook)
        .map(|e| {
            let bytes = fs::read(dir.join(&e.path)).with_context(|| format!("cannot read {}", e.path)).kind(FailureKind::Input)?;
            NotebookModel::parse_bytes(&e.path, &bytes)
                .map_err(|err| anyhow!("{}: {}", err.path, err.reason))
                .kind(FailureKind::Input)
        })
        .collect()
}

pub fn determinism(ctx: &Context, run_a: &Path, run_b: &Path) -> Result<()> {
    let a = load_notebooks(run_a)?;
    let b = load_notebooks(run_b)?;
    let report: DeterminismReport = output_determinism(&a, &b).kind(FailureKind::Input)?;
    ctx.emit_as(&report, || {
        let delta = report.delta.map_or("n/a (no comparable outputs)".to_string(), one);
        let mut s = format!("delta {delta}  ({} of {} output cells match)\n", report.matching_cells, report.compared_cells);
        for (path, cell) in &report.differing {
            let _ = writeln!(s, "  differs: {path} code cell {cell}");
        }
        s
    })
}
