//! D: documentation.

use std::sync::OnceLock;

use regex::Regex;

use super::support::{dirs, has_word_prefix, lower_ext, lower_stem, make_targets, root_readmes, strip_prompt, texts_of};
use super::{binary, AnalysisContext, Evidence, SubMetricId, SubMetricResult};
use crate::repo::python::{comment_density_counts, definitions};
use crate::repo::readme::ReadmeModel;
use crate::repo::{CellKind, CodeUnitKind, FileKind};

/// Heading keyword groups: install, run, expected output, requirements.
pub const SECTION_GROUPS: [(&str, &[&str]); 4] = [
    ("install", &["install", "setup", "set up", "set-up", "getting started", "environment", "build"]),
    ("run", &["usage", "run", "how to", "example", "tutorial", "quickstart", "quick start", "reproduc", "execut", "training", "demo"]),
    ("expected output", &["output", "result", "expected", "figure", "benchmark", "performance"]),
    ("requirements", &["requirement", "dependenc", "prerequisite", "system", "hardware", "software", "compatib"]),
];

/// Which of the four section groups a README's headings cover, with the
/// first matching heading line per group.
pub fn section_groups(readme: &ReadmeModel) -> [Option<(usize, String)>; 4] {
    let mut found: [Option<(usize, String)>; 4] = Default::default();
    for h in &readme.headings {
        for (g, (_, words)) in SECTION_GROUPS.iter().enumerate() {
            if found[g].is_none() && words.iter().any(|w| has_word_prefix(&h.text, w)) {
                found[g] = Some((h.line + 1, h.text.clone()));
            }
        }
    }
    found
}

pub fn doc_structure(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut best: Option<(usize, &ReadmeModel, [Option<(usize, String)>; 4])> = None;
    for r in root_readmes(ctx) {
        let groups = section_groups(r);
        let n = groups.iter().filter(|g| g.is_some()).count();
        if best.as_ref().is_none_or(|b| n > b.0) {
            best = Some((n, r, groups));
        }
    }
    let Some((n, readme, groups)) = best else {
        return SubMetricResult::new(SubMetricId::DocStructure, Some(0.0), vec![Evidence::repo("no readme")]);
    };
    let mut ev: Vec<Evidence> = groups
        .iter()
        .zip(SECTION_GROUPS.iter())
        .filter_map(|(g, (name, _))| {
            g.as_ref().map(|(line, text)| Evidence::matched(&readme.path, Some(*line), text.clone(), format!("{name} section")))
        })
        .collect();
    if ev.is_empty() {
        ev.push(Evidence::file(&readme.path, "no execution-relevant sections"));
    }
    SubMetricResult::new(SubMetricId::DocStructure, Some(25.0 * n as f64), ev)
}

fn install_command_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(concat!(
            r"(?i)(\b(pip3?|uv\s+pip|python3?\s+-m\s+pip)\s+install\b",
            r"|\b(conda|mamba|micromamba)\s+(env\s+create|create|install|env\s+update)\b",
            r"|\b(poetry|pipenv|pdm|hatch)\s+install\b|\buv\s+sync\b",
            r"|\bpython3?\s+setup\.py\s+(install|develop)\b",
            r"|\bdocker(-compose|\s+compose)?\s+(build|pull)\b",
            r"|\b(singularity|apptainer)\s+(build|pull)\b",
            r"|\bmake\s+(install|setup|env|environment|venv|deps|requirements|conda)\b",
            r"|(^|\s)(bash|sh|source|\.)\s+\S*(install|setup|bootstrap|env)\S*\.sh\b",
            r"|(^|\s)\./\S*(install|setup|bootstrap|env)\S*\.sh\b",
            r"|\binstall\.packages\s*\()",
        ))
        .unwrap()
    })
}

fn vague_install_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(install|installation|installing|setup|set up|dependencies|requirements)\b").unwrap())
}

/// Number of install commands on a shell line (segments split at `&&` and `;`).
fn install_commands(line: &str) -> usize {
    strip_prompt(line).split("&&").flat_map(|s| s.split(';')).filter(|s| install_command_re().is_match(s)).count()
}

fn block_is_comment(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#') || t.starts_with("//")
}

fn install_tier(path: &str, text: &str, blocks: &[(usize, &str)]) -> (f64, Vec<Evidence>) {
    let mut ev = Vec::new();
    let mut best = 0.0;
    for (i, body) in blocks {
        let count: usize = body.lines().filter(|l| !block_is_comment(l)).map(install_commands).sum();
        if count == 1 {
            ev.push(Evidence::matched(path, Some(*i), "fenced install command", "single-command install"));
            best = 100.0;
        } else if count > 1 && best < 60.0 {
            ev.push(Evidence::matched(path, Some(*i), "fenced install commands", format!("{count}-step install")));
            best = 60.0;
        }
    }
    if best < 60.0 {
        if let Some((n, _)) = text.lines().enumerate().find(|(_, l)| install_commands(l) > 0) {
            ev.push(Evidence::matched(path, Some(n + 1), "install command", "install steps in prose"));
            best = 60.0;
        }
    }
    if best < 30.0 {
        if let Some((n, l)) = text.lines().enumerate().find(|(_, l)| vague_install_re().is_match(l)) {
            let m = vague_install_re().find(l).map(|m| m.as_str().to_string()).unwrap_or_default();
            ev.push(Evidence::matched(path, Some(n + 1), m, "vague install mention"));
            best = 30.0;
        }
    }
    (best, ev)
}

/// Block bodies with the 1-based line of their opening fence.
fn block_lines(readme: &ReadmeModel) -> Vec<(usize, &str)> {
    readme.fenced_code_blocks.iter().map(|b| (b.line + 1, b.body.as_str())).collect()
}

pub fn install_instructions(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut best = 0.0;
    let mut ev = Vec::new();
    let mut docs: Vec<&ReadmeModel> = root_readmes(ctx).collect();
    let extra: Vec<ReadmeModel> = ctx
        .snapshot
        .inventory()
        .entries()
        .iter()
        .filter(|e| e.kind == FileKind::Other && lower_stem(&e.path).starts_with("install"))
        .filter(|e| matches!(lower_ext(&e.path).as_deref(), Some("md" | "rst" | "txt" | "markdown")))
        .filter_map(|e| ctx.models.text(&e.path).map(|t| ReadmeModel::parse(&e.path, t)))
        .collect();
    docs.extend(extra.iter());
    for r in docs {
        let (score, e) = install_tier(&r.path, &r.text, &block_lines(r));
        if score > best {
            best = score;
            ev = e;
        } else if score == best {
            ev.extend(e);
        }
    }
    if ev.is_empty() {
        ev.push(Evidence::repo("no install instructions"));
    }
    SubMetricResult::new(SubMetricId::InstallInstructions, Some(best), ev)
}

fn runnable_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(concat!(
            r"^(python3?|jupyter|ipython|bash|sh|zsh|make|snakemake|nextflow|Rscript|julia|papermill|streamlit",
            r"|torchrun|docker\s+run|docker\s+compose\s+up|docker-compose\s+up|accelerate\s+launch|uv\s+run|poetry\s+run",
            r"|pipenv\s+run|conda\s+run|srun|sbatch|cwltool|dvc\s+repro|\./\S+)(\s|$)",
        ))
        .unwrap()
    })
}

const EXAMPLE_DIRS: &[&str] = &["examples", "example", "demo", "demos", "tutorial", "tutorials", "samples"];

pub fn usage_examples(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut best = 0.0;
    let mut ev = Vec::new();
    for r in root_readmes(ctx) {
        for (line, body) in block_lines(r) {
            let runnable = body.lines().filter(|l| !block_is_comment(l)).map(strip_prompt).find(|l| {
                runnable_re().is_match(l) && install_commands(l) == 0
            });
            if let Some(cmd) = runnable {
                ev.push(Evidence::matched(&r.path, Some(line), cmd.to_string(), "runnable command in code block"));
                best = 100.0;
            } else if best < 60.0 {
                ev.push(Evidence::file(&r.path, "code block"));
                best = 60.0;
            }
        }
    }
    if best < 40.0 {
        for e in ctx.snapshot.inventory().entries() {
            if let Some(d) = dirs(&e.path).iter().find(|d| EXAMPLE_DIRS.contains(&d.as_str())) {
                ev.push(Evidence::file(&e.path, format!("file in {d}/ directory")));
                best = 40.0;
            }
        }
    }
    if best == 100.0 {
        ev.retain(|e| e.matched_pattern.is_some());
    }
    if ev.is_empty() {
        ev.push(Evidence::repo("no usage examples"));
    }
    SubMetricResult::new(SubMetricId::UsageExamples, Some(best), ev)
}

/// Notebook component: markdown-to-code cell ratio against a 0.5 target.
/// Empty cells are not counted.
pub fn notebook_ratio_component(markdown: usize, code: usize) -> Option<f64> {
    (code > 0).then(|| f64::min(200.0 * markdown as f64 / code as f64, 100.0))
}

/// Script component: comment-line density against a 20% target.
pub fn comment_component(comment_lines: usize, nonblank: usize) -> Option<f64> {
    (nonblank > 0).then(|| f64::min(500.0 * comment_lines as f64 / nonblank as f64, 100.0))
}

pub fn inline_explanation(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut ev = Vec::new();
    let (mut md, mut code) = (0usize, 0usize);
    for nb in ctx.models.parsed_notebooks() {
        let m = nb.cells.iter().filter(|c| c.kind == CellKind::Markdown && !c.is_blank()).count();
        let k = nb.cells.iter().filter(|c| c.kind == CellKind::Code && !c.is_blank()).count();
        if k > 0 {
            ev.push(Evidence::file(&nb.path, format!("{m} markdown / {k} code cells")));
        }
        md += m;
        code += k;
    }
    let (mut comments, mut lines) = (0usize, 0usize);
    for u in ctx.models.code_units.iter().filter(|u| u.kind == CodeUnitKind::Script) {
        let (c, n) = comment_density_counts(&u.python);
        if n > 0 {
            ev.push(Evidence::file(&u.path, format!("{c} of {n} lines commented")));
        }
        comments += c;
        lines += n;
    }
    let parts: Vec<f64> = [notebook_ratio_component(md, code), comment_component(comments, lines)].into_iter().flatten().collect();
    let score = (!parts.is_empty()).then(|| parts.iter().sum::<f64>() / parts.len() as f64);
    if score.is_none() {
        ev.push(Evidence::repo("no notebooks or scripts"));
    }
    SubMetricResult::new(SubMetricId::InlineExplanation, score, ev)
}

const ENTRY_STEMS: &[&str] = &["main", "__main__", "run", "cli", "app", "pipeline", "reproduce"];
const ENTRY_TARGETS: &[&str] = &["run", "all", "main", "reproduce", "pipeline"];

fn console_scripts(path: &str, text: &str) -> bool {
    let name = path.rsplit('/').next().unwrap_or(path).to_ascii_lowercase();
    match name.as_str() {
        "pyproject.toml" => text.parse::<toml::Table>().is_ok_and(|t| {
            let project = t.get("project").and_then(|p| p.as_table());
            let poetry = t.get("tool").and_then(|x| x.get("poetry")).and_then(|p| p.as_table());
            project.is_some_and(|p| p.contains_key("scripts") || p.contains_key("gui-scripts"))
                || poetry.is_some_and(|p| p.contains_key("scripts"))
        }),
        "setup.py" | "setup.cfg" => text.contains("console_scripts"),
        _ => false,
    }
}

pub fn entry_point(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut ev = Vec::new();
    for e in ctx.snapshot.inventory().entries() {
        let stem = lower_stem(&e.path);
        let code_file = matches!(e.kind, FileKind::PythonSource | FileKind::ShellScript)
            || matches!(lower_ext(&e.path).as_deref(), Some("r" | "jl"));
        if code_file && (ENTRY_STEMS.contains(&stem.as_str()) || stem.starts_with("run_") || stem.starts_with("run-")) {
            ev.push(Evidence::file(&e.path, "entry script"));
        }
    }
    for (path, text) in texts_of(ctx, &[FileKind::Makefile]) {
        for t in make_targets(text) {
            if ENTRY_TARGETS.contains(&t.name.to_ascii_lowercase().as_str()) {
                ev.push(Evidence::matched(path, Some(t.line), t.name.clone(), "run make target"));
            }
        }
    }
    for (path, text) in texts_of(ctx, &[FileKind::DependencyManifest]) {
        if console_scripts(path, text) {
            ev.push(Evidence::file(path, "declared console entry point"));
        }
    }
    let hit = !ev.is_empty();
    if !hit {
        ev.push(Evidence::repo("no entry point"));
    }
    SubMetricResult::new(SubMetricId::EntryPoint, Some(binary(hit)), ev)
}

pub fn docstring_coverage(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let (mut documented, mut total) = (0usize, 0usize);
    let mut ev = Vec::new();
    for u in ctx.models.code_units.iter().filter(|u| u.kind != CodeUnitKind::Test && u.parse_error.is_none()) {
        let defs: Vec<_> = definitions(&u.python).into_iter().filter(|d| d.is_public()).collect();
        if defs.is_empty() {
            continue;
        }
        let d = defs.iter().filter(|d| d.documented).count();
        ev.push(Evidence::file(&u.path, format!("{d} of {} public definitions documented", defs.len())));
        documented += d;
        total += defs.len();
    }
    let score = (total > 0).then(|| 100.0 * documented as f64 / total as f64);
    if score.is_none() {
        ev.push(Evidence::repo("no public functions or classes"));
    }
    SubMetricResult::new(SubMetricId::DocstringCoverage, score, ev)
}

pub fn reuse_metadata(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let mut ev = Vec::new();
    let mut kinds = 0;
    for (kind, note) in [(FileKind::License, "license"), (FileKind::Citation, "citation file"), (FileKind::Codemeta, "code metadata")] {
        let files: Vec<_> = inv.of_kind(kind).collect();
        if !files.is_empty() {
            kinds += 1;
            ev.extend(files.iter().map(|e| Evidence::file(&e.path, note)));
        }
    }
    let score = [0.0, 33.0, 66.0, 100.0][kinds];
    if ev.is_empty() {
        ev.push(Evidence::repo("no license, citation or metadata file"));
    }
    SubMetricResult::new(SubMetricId::ReuseMetadata, Some(score), ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_components() {
        assert_eq!(notebook_ratio_component(5, 10), Some(100.0));
        assert_eq!(notebook_ratio_component(2, 10), Some(40.0));
        assert_eq!(notebook_ratio_component(3, 0), None);
        assert_eq!(comment_component(1, 10), Some(50.0));
        assert_eq!(comment_component(5, 10), Some(100.0));
    }

    #[test]
    fn install_command_counting() {
        assert_eq!(install_commands("$ pip install -r requirements.txt"), 1);
        assert_eq!(install_commands("conda env create -f environment.yml && conda activate x"), 1);
        assert_eq!(install_commands("pip install numpy && pip install ."), 2);
        assert_eq!(install_commands("git clone https://x/y"), 0);
        assert_eq!(install_commands("bash scripts/install_deps.sh"), 1);
    }

    #[test]
    fn readme_groups() {
        let r = ReadmeModel::parse("README.md", "# X\n## Installation\n## Usage\n## Expected outputs\n## Requirements\n");
        assert!(section_groups(&r).iter().all(Option::is_some));
        let r = ReadmeModel::parse("README.md", "# X\n## Installation\n## Running\n## License\n");
        assert_eq!(section_groups(&r).iter().filter(|g| g.is_some()).count(), 2);
    }

    #[test]
    fn install_tiers() {
        let one = ReadmeModel::parse("README.md", "# X\n```bash\ngit clone x\npip install -r requirements.txt\n```\n");
        assert_eq!(install_tier("README.md", &one.text, &block_lines(&one)).0, 100.0);
        let many = ReadmeModel::parse("README.md", "# X\n```\npip install numpy\npip install scipy\n```\n");
        assert_eq!(install_tier("README.md", &many.text, &block_lines(&many)).0, 60.0);
        let prose = ReadmeModel::parse("README.md", "Run `pip install numpy` first.\n");
        assert_eq!(install_tier("README.md", &prose.text, &block_lines(&prose)).0, 60.0);
        let vague = ReadmeModel::parse("README.md", "Install the dependencies.\n");
        assert_eq!(install_tier("README.md", &vague.text, &block_lines(&vague)).0, 30.0);
        let none = ReadmeModel::parse("README.md", "Nothing here.\n");
        assert_eq!(install_tier("README.md", &none.text, &block_lines(&none)).0, 0.0);
    }
}
