//! A: data accessibility.

use std::sync::OnceLock;

use regex::Regex;

use super::support::{dirs, doc_texts, lower_ext, lower_name, lower_stem, make_targets, shell_lines, texts_of, url_re, code_lines};
use super::{binary, AnalysisContext, Evidence, SubMetricId, SubMetricResult};
use crate::patterns::HostRule;
use crate::repo::readme::{word_count, ReadmeModel};
use crate::repo::{CodeUnitKind, FileKind};

const DATA_DIRS: &[&str] = &["data", "dataset", "datasets", "raw", "raw_data", "input", "inputs"];

const DATA_DOC_STEMS: &[&str] = &[
    "data", "dataset", "datasets", "datasheet", "data_description", "data-description", "data_dictionary",
    "data-dictionary", "codebook", "data_card", "datacard", "data_availability", "data-availability",
];

fn data_heading_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(data|datasets?)\b").unwrap())
}

/// Word count of each heading section named like a data section, including
/// its subsections.
fn data_sections(readme: &ReadmeModel) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, s) in readme.sections.iter().enumerate() {
        let Some(h) = s.heading.map(|h| &readme.headings[h]) else { continue };
        if !data_heading_re().is_match(&h.text) {
            continue;
        }
        let mut words = s.word_count;
        for later in &readme.sections[i + 1..] {
            match later.heading.map(|h| readme.headings[h].level) {
                Some(level) if level > h.level => words += later.word_count,
                _ => break,
            }
        }
        out.push((h.line + 1, words));
    }
    out
}

pub fn data_description(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut dedicated: Vec<(String, Option<usize>, usize)> = Vec::new();
    for (path, text) in doc_texts(ctx) {
        let stem = lower_stem(path);
        let in_data_dir = dirs(path).iter().any(|d| DATA_DIRS.contains(&d.as_str()));
        let is_readme = ctx.snapshot.inventory().get(path).is_some_and(|e| e.kind == FileKind::Readme);
        if DATA_DOC_STEMS.contains(&stem.as_str()) || stem.starts_with("data_") || (is_readme && in_data_dir) {
            dedicated.push((path.to_string(), None, word_count(text)));
        }
    }
    for r in &ctx.models.readmes {
        for (line, words) in data_sections(r) {
            dedicated.push((r.path.clone(), Some(line), words));
        }
    }
    let best = dedicated.iter().map(|d| d.2).max().unwrap_or(0);
    let mut ev: Vec<Evidence> = dedicated
        .iter()
        .map(|(p, line, w)| Evidence { path: p.clone(), line_number: *line, matched_pattern: None, note: format!("data documentation, {w} words") })
        .collect();
    let score = if best >= 200 {
        100.0
    } else if best >= 50 {
        60.0
    } else {
        let mention_re = data_heading_re();
        let mut mentions: Vec<Evidence> = doc_texts(ctx)
            .into_iter()
            .filter(|(_, t)| mention_re.is_match(t))
            .map(|(p, _)| Evidence::file(p, "mentions data"))
            .collect();
        mentions.extend(
            ctx.models.parsed_notebooks().filter(|nb| mention_re.is_match(&nb.markdown_text())).map(|nb| Evidence::file(&nb.path, "mentions data")),
        );
        if mentions.is_empty() && dedicated.is_empty() {
            ev.push(Evidence::repo("no data documentation"));
            0.0
        } else {
            ev.extend(mentions);
            30.0
        }
    };
    SubMetricResult::new(SubMetricId::DataDescription, Some(score), ev)
}

fn doi_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)(?:doi\.org/|\bdoi:\s*)(10\.\d{4,9}/[^\s"'<>)\]]+)"#).unwrap())
}

const DATA_URL_EXTENSIONS: &[&str] = &[
    "zip", "tar", "gz", "tgz", "bz2", "xz", "7z", "csv", "tsv", "h5", "hdf5", "npz", "npy", "parquet", "pkl", "mat",
    "nc", "fasta", "fastq", "vcf", "bam", "xlsx", "json", "jsonl", "txt", "dat",
];

fn url_host(url: &str) -> String {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    let host = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host = host.rsplit('@').next().unwrap_or(host);
    host.split(':').next().unwrap_or(host).to_ascii_lowercase()
}

fn host_matches(host: &str, rule: &HostRule) -> bool {
    host == rule.host || host.ends_with(&format!(".{}", rule.host))
}

fn looks_like_data_url(url: &str) -> bool {
    let lower = url.to_ascii_lowercase();
    let path = lower.split(['?', '#']).next().unwrap_or(&lower);
    path.contains("/releases/download/")
        || path.rsplit('/').next().and_then(|f| f.rsplit_once('.')).is_some_and(|(_, e)| DATA_URL_EXTENSIONS.contains(&e))
}

/// Tier of a single URL, or `None` when it is not a data pointer.
pub(crate) fn url_tier(url: &str, archival: &[HostRule], platform: &[HostRule]) -> Option<f64> {
    let host = url_host(url);
    let lower = url.to_ascii_lowercase();
    if lower.starts_with("s3://") || lower.starts_with("gs://") {
        return Some(50.0);
    }
    if archival.iter().any(|r| host_matches(&host, r) && (!r.data_only || looks_like_data_url(url))) {
        return Some(75.0);
    }
    if platform.iter().any(|r| host_matches(&host, r) && (!r.data_only || looks_like_data_url(url))) {
        return Some(50.0);
    }
    None
}

pub fn data_pointer(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let skip = [FileKind::License, FileKind::Citation, FileKind::Codemeta];
    let mut sources: Vec<(String, String)> = ctx
        .models
        .texts
        .iter()
        .filter(|(p, _)| inv.get(p).is_none_or(|e| !skip.contains(&e.kind)))
        .map(|(p, t)| (p.clone(), t.clone()))
        .collect();
    for nb in ctx.models.parsed_notebooks() {
        let all: Vec<&str> = nb.cells.iter().map(|c| c.source.as_str()).collect();
        sources.push((nb.path.clone(), all.join("\n")));
    }
    let mut best = 0.0;
    let mut ev = Vec::new();
    for (path, text) in &sources {
        for (i, line) in text.lines().enumerate() {
            if let Some(c) = doi_re().captures(line) {
                ev.push(Evidence::matched(path, Some(i + 1), c[0].to_string(), "DOI link"));
                best = f64::max(best, 100.0);
            }
            for m in url_re().find_iter(line) {
                let url = m.as_str().trim_end_matches(['.', ':']);
                if let Some(t) = url_tier(url, &ctx.patterns.archival_hosts, &ctx.patterns.platform_hosts) {
                    let note = if t == 75.0 { "archival repository URL" } else { "cloud or platform URL" };
                    ev.push(Evidence::matched(path, Some(i + 1), url.to_string(), note));
                    best = f64::max(best, t);
                }
            }
        }
    }
    if best < 25.0 {
        let data: Vec<_> = inv.of_kind(FileKind::DataFile).collect();
        if !data.is_empty() {
            best = 25.0;
            ev.extend(data.iter().map(|e| Evidence::file(&e.path, "committed data file")));
        }
    }
    if ev.is_empty() {
        ev.push(Evidence::repo("no data pointer"));
    }
    SubMetricResult::new(SubMetricId::DataPointer, Some(best), ev)
}

const WORKFLOW_FILE_NAMES: &[&str] = &["snakefile", "nextflow.config", "dvc.yaml", "mlproject", "dodo.py", "luigi.cfg"];
const WORKFLOW_FILE_EXTENSIONS: &[&str] = &["smk", "nf", "cwl", "wdl"];

const UTILITY_TARGETS: &[&str] = &[
    "clean", "install", "test", "tests", "lint", "format", "fmt", "help", "docs", "doc", "setup", "env", "venv", "check",
    "dist", "build", "upload", "release", "publish", "coverage", "style", "typecheck", "requirements", "deps",
];
const PIPELINE_TARGETS: &[&str] = &[
    "all", "run", "pipeline", "reproduce", "analysis", "analyze", "data", "figures", "results", "paper", "train",
    "evaluate", "experiments", "report",
];

fn pipeline_command_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(^|[\s;&|(])(python3?|Rscript|jupyter|papermill|snakemake|nextflow|julia|bash|sh|\./\S+)(\s|$)").unwrap()
    })
}

fn run_all_script(kind: FileKind, stem: &str) -> bool {
    match kind {
        FileKind::ShellScript => ["run", "reproduce", "pipeline", "all"].iter().any(|p| stem.starts_with(p)),
        FileKind::PythonSource => {
            matches!(stem, "run_all" | "runall" | "reproduce" | "reproduce_all" | "pipeline" | "run_pipeline" | "run_experiments")
        }
        _ => false,
    }
}

pub fn workflow_orchestration(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let mut ev = Vec::new();
    let mut best = 0.0;
    for e in inv.entries() {
        let name = lower_name(&e.path);
        let ext = lower_ext(&e.path);
        if WORKFLOW_FILE_NAMES.contains(&name.as_str()) || ext.as_deref().is_some_and(|x| WORKFLOW_FILE_EXTENSIONS.contains(&x)) {
            ev.push(Evidence::file(&e.path, "workflow engine file"));
            best = 100.0;
        }
    }
    if best < 60.0 {
        for (path, text) in texts_of(ctx, &[FileKind::Makefile]) {
            for t in make_targets(text) {
                let name = t.name.to_ascii_lowercase();
                if UTILITY_TARGETS.contains(&name.as_str()) {
                    continue;
                }
                let runs = t.recipe.iter().any(|r| pipeline_command_re().is_match(r));
                if PIPELINE_TARGETS.contains(&name.as_str()) || runs {
                    ev.push(Evidence::matched(path, Some(t.line), t.name.clone(), "Makefile pipeline target"));
                    best = f64::max(best, 60.0);
                }
            }
        }
    }
    if best < 40.0 {
        for e in inv.entries() {
            if run_all_script(e.kind, &lower_stem(&e.path)) {
                ev.push(Evidence::file(&e.path, "run-all script"));
                best = 40.0;
            }
        }
    }
    if ev.is_empty() {
        ev.push(Evidence::repo("no workflow orchestration"));
    }
    SubMetricResult::new(SubMetricId::WorkflowOrchestration, Some(best), ev)
}

pub fn data_acquisition(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let mut ev = Vec::new();
    for e in inv.entries() {
        let name = lower_name(&e.path);
        if name.ends_with(".dvc") || name == "dvc.yaml" || name == "dvc.lock" || e.path.starts_with(".dvc/") || e.path.starts_with(".datalad/") {
            ev.push(Evidence::file(&e.path, "data version control tracking"));
        } else if name == ".gitattributes" && ctx.models.text(&e.path).is_some_and(|t| t.contains("filter=lfs")) {
            ev.push(Evidence::matched(&e.path, None, "filter=lfs", "large-file storage tracking"));
        }
    }
    let mut lines: Vec<(String, usize, String)> = Vec::new();
    for (path, text) in texts_of(ctx, &[FileKind::ShellScript, FileKind::Makefile]) {
        lines.extend(shell_lines(text).into_iter().map(|(n, l)| (path.to_string(), n, l.to_string())));
    }
    for u in ctx.models.code_units.iter().filter(|u| u.kind != CodeUnitKind::Test) {
        lines.extend(code_lines(u).into_iter().map(|(n, l)| (u.path.clone(), n, l)));
    }
    for (path, n, line) in &lines {
        if let Some(p) = ctx.patterns.download.iter().find(|p| p.regex.is_match(line)) {
            ev.push(Evidence::matched(path, (*n > 0).then_some(*n), p.source.clone(), "data download command"));
        }
    }
    let hit = !ev.is_empty();
    if !hit {
        ev.push(Evidence::repo("no automated data acquisition"));
    }
    SubMetricResult::new(SubMetricId::DataAcquisition, Some(binary(hit)), ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::Patterns;

    #[test]
    fn url_tiers() {
        let p = Patterns::default();
        let t = |u: &str| url_tier(u, &p.archival_hosts, &p.platform_hosts);
        assert_eq!(t("https://zenodo.org/records/123"), Some(75.0));
        assert_eq!(t("https://drive.google.com/file/d/x"), Some(50.0));
        assert_eq!(t("https://github.com/owner/repo"), None);
        assert_eq!(t("https://github.com/o/r/releases/download/v1/data.zip"), Some(50.0));
        assert_eq!(t("https://example.com/data.csv"), None);
        assert_eq!(t("s3://bucket/key"), Some(50.0));
        assert_eq!(t("https://www.ncbi.nlm.nih.gov/geo/query/acc.cgi?acc=GSE1"), Some(75.0));
    }

    #[test]
    fn doi_forms() {
        assert!(doi_re().is_match("see https://doi.org/10.5281/zenodo.12345"));
        assert!(doi_re().is_match("doi: 10.1000/xyz"));
        assert!(!doi_re().is_match("version 10.1/2"));
    }

    #[test]
    fn data_section_words_include_subsections() {
        let body = "word ".repeat(30);
        let md = format!("# Title\n## Data\n{body}\n### Raw\n{body}\n## Usage\n{body}\n");
        let r = ReadmeModel::parse("README.md", &md);
        assert_eq!(data_sections(&r), vec![(2, 60)]);
    }
}
