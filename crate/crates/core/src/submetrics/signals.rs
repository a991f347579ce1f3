//! S: reproducibility signals.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

use super::code::local_modules;
use super::environment::container_facts;
use super::support::{code_lines, dirs, doc_texts, lower_ext, lower_name, lower_stem, texts_of};
use super::{binary, AnalysisContext, Evidence, SubMetricId, SubMetricResult};
use crate::repo::notebook::is_strictly_increasing;
use crate::repo::python::imports;
use crate::repo::{CodeUnitKind, FileKind};

/// σ = 100·|F_seed| / |F_rand|; no stochastic file means not applicable.
pub fn seed_ratio(seeded: usize, stochastic: usize) -> Option<f64> {
    (stochastic > 0).then(|| 100.0 * seeded as f64 / stochastic as f64)
}

pub fn seed_management(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let p = ctx.patterns;
    let mut ev = Vec::new();
    let (mut stochastic, mut seeded) = (0usize, 0usize);
    for u in &ctx.models.code_units {
        let lines = code_lines(u);
        let rand = lines.iter().find_map(|(n, l)| p.randomness.iter().find(|r| r.regex.is_match(l)).map(|r| (*n, r)));
        let Some((rn, rp)) = rand else { continue };
        stochastic += 1;
        let seed = lines.iter().find_map(|(n, l)| p.seed.iter().find(|r| r.regex.is_match(l)).map(|r| (*n, r)));
        match seed {
            Some((sn, sp)) => {
                seeded += 1;
                ev.push(Evidence::matched(&u.path, (sn > 0).then_some(sn), sp.source.clone(), "seeded stochastic file"));
            }
            None => ev.push(Evidence::matched(&u.path, (rn > 0).then_some(rn), rp.source.clone(), "stochastic file without seed")),
        }
    }
    let score = seed_ratio(seeded, stochastic);
    if score.is_none() {
        ev.push(Evidence::repo("no stochastic operations detected"));
    }
    SubMetricResult::new(SubMetricId::SeedManagement, score, ev)
}

pub fn notebook_exec_order(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut ev = Vec::new();
    let (mut ordered, mut judged) = (0usize, 0usize);
    for nb in &ctx.models.notebooks {
        match nb {
            Err(e) => {
                judged += 1;
                ev.push(Evidence::file(&e.path, format!("malformed notebook counted as out of order: {}", e.reason)));
            }
            Ok(nb) => {
                let counts = nb.execution_counts();
                if counts.is_empty() {
                    ev.push(Evidence::file(&nb.path, "never executed, excluded"));
                    continue;
                }
                judged += 1;
                if is_strictly_increasing(&counts) {
                    ordered += 1;
                    ev.push(Evidence::file(&nb.path, "execution counts increase top to bottom"));
                } else {
                    ev.push(Evidence::file(&nb.path, format!("execution counts out of order: {counts:?}")));
                }
            }
        }
    }
    let score = (judged > 0).then(|| 100.0 * ordered as f64 / judged as f64);
    if ctx.models.notebooks.is_empty() {
        ev.push(Evidence::repo("no notebooks"));
    }
    SubMetricResult::new(SubMetricId::NotebookExecOrder, score, ev)
}

/// 100·min(|T|/2, 1).
pub fn test_presence_score(test_files: usize) -> f64 {
    if test_files >= 2 { 100.0 } else { 50.0 * test_files as f64 }
}

pub fn test_file_presence(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let tests: Vec<_> = ctx.snapshot.inventory().of_kind(FileKind::TestFile).collect();
    let mut ev: Vec<Evidence> = tests.iter().map(|e| Evidence::file(&e.path, "test file")).collect();
    if ev.is_empty() {
        ev.push(Evidence::repo("no test files"));
    }
    SubMetricResult::new(SubMetricId::TestFilePresence, Some(test_presence_score(tests.len())), ev)
}

const OUTPUT_DIRS: &[&str] = &[
    "results", "result", "outputs", "output", "expected", "expected_output", "expected_outputs", "expected_results",
    "reference", "reference_output", "reference_outputs", "figures", "figs", "plots",
];
const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "svg", "pdf", "eps", "tif", "tiff", "gif"];
const DECORATION_DIRS: &[&str] = &["docs", "doc", "assets", "static", ".github", "img", "logo", "logos", "_static", "media"];

pub fn expected_outputs(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut ev = Vec::new();
    let mut best = 0.0;
    for e in ctx.snapshot.inventory().entries() {
        let d = dirs(&e.path);
        if let Some(dir) = d.iter().find(|x| OUTPUT_DIRS.contains(&x.as_str())) {
            ev.push(Evidence::file(&e.path, format!("committed file in {dir}/")));
            best = 100.0;
        }
    }
    if best < 100.0 {
        for e in ctx.snapshot.inventory().entries() {
            let image = lower_ext(&e.path).is_some_and(|x| IMAGE_EXTENSIONS.contains(&x.as_str()));
            if image && !dirs(&e.path).iter().any(|x| DECORATION_DIRS.contains(&x.as_str())) {
                ev.push(Evidence::file(&e.path, "committed figure"));
                best = 50.0;
            }
        }
        for nb in ctx.models.parsed_notebooks() {
            if nb.code_cells().any(|c| !c.outputs.is_empty()) {
                ev.push(Evidence::file(&nb.path, "notebook with saved outputs"));
                best = 50.0;
            }
        }
    }
    if ev.is_empty() {
        ev.push(Evidence::repo("no committed outputs"));
    }
    SubMetricResult::new(SubMetricId::ExpectedOutputs, Some(best), ev)
}

pub fn ci_presence(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut ev: Vec<Evidence> =
        ctx.snapshot.inventory().of_kind(FileKind::CiConfig).map(|e| Evidence::file(&e.path, "CI configuration")).collect();
    let hit = !ev.is_empty();
    if !hit {
        ev.push(Evidence::repo("no CI configuration"));
    }
    SubMetricResult::new(SubMetricId::CiPresence, Some(binary(hit)), ev)
}

const CONFIG_WORDS: &[&str] = &["config", "conf", "cfg", "param", "settings", "hparams", "hyperparam", "args", "options"];
const CONFIG_DIRS: &[&str] = &["config", "configs", "conf", "cfg", "params", "experiments", "hparams"];
const CONFIG_ONLY_EXTENSIONS: &[&str] = &["ini", "cfg", "conf", "config", "properties", "env"];
const SETTINGS_MODULES: &[&str] = &["config", "configs", "settings", "params", "parameters", "constants", "conf", "hparams", "hyperparameters", "options"];

fn cli_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\b(argparse|click|typer|fire|docopt|hydra|absl\.flags|absl\s+import\s+flags|ml_collections|jsonargparse|tyro|sys\.argv|OmegaConf|configparser)\b").unwrap()
    })
}

fn env_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b(os\.environ|os\.getenv|getenv\s*\(|dotenv|load_dotenv)").unwrap())
}

fn run_config_file(path: &str) -> bool {
    let name = lower_name(path);
    let stem = lower_stem(path);
    if matches!(name.as_str(), ".python-version" | "runtime.txt" | ".tool-versions") {
        return false;
    }
    let ext = lower_ext(path);
    if ext.as_deref().is_some_and(|e| matches!(e, "smk" | "nf" | "cwl" | "wdl")) {
        return false;
    }
    CONFIG_WORDS.iter().any(|w| stem.contains(w))
        || dirs(path).iter().any(|d| CONFIG_DIRS.contains(&d.as_str()))
        || ext.as_deref().is_some_and(|e| CONFIG_ONLY_EXTENSIONS.contains(&e))
        || name == ".env"
}

pub fn config_externalised(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let mut ev = Vec::new();
    let mut best = 0.0;
    for e in ctx.snapshot.inventory().of_kind(FileKind::ConfigFile) {
        if run_config_file(&e.path) {
            ev.push(Evidence::file(&e.path, "configuration file"));
            best = 100.0;
        }
    }
    let units: Vec<_> = ctx.models.code_units.iter().filter(|u| u.kind != CodeUnitKind::Test).collect();
    for u in &units {
        if let Some((n, m)) = code_lines(u).into_iter().find_map(|(n, l)| cli_re().find(&l).map(|m| (n, m.as_str().to_string()))) {
            ev.push(Evidence::matched(&u.path, (n > 0).then_some(n), m, "command-line argument parsing"));
            best = 100.0;
        }
    }
    if best < 100.0 {
        for u in &units {
            if let Some((n, m)) = code_lines(u).into_iter().find_map(|(n, l)| env_re().find(&l).map(|m| (n, m.as_str().to_string()))) {
                ev.push(Evidence::matched(&u.path, (n > 0).then_some(n), m, "environment-variable configuration"));
                best = 50.0;
            }
            if u.kind == CodeUnitKind::Script && SETTINGS_MODULES.contains(&lower_stem(&u.path).as_str()) {
                ev.push(Evidence::file(&u.path, "settings module"));
                best = 50.0;
            }
        }
    }
    if ev.is_empty() {
        ev.push(Evidence::repo("no externalised configuration"));
    }
    SubMetricResult::new(SubMetricId::ConfigExternalised, Some(best), ev)
}

fn hardware_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\b(gpus?|cuda|cudnn|nvidia|vram|tpus?|hardware|\d+\s*gb\s+(of\s+)?(ram|memory|vram|gpu)|ram)\b").unwrap()
    })
}

pub fn hardware_requirements(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let p = ctx.patterns;
    let local = local_modules(ctx);
    let mut gpu: BTreeSet<(String, String, Option<usize>)> = BTreeSet::new();
    for u in ctx.models.code_units.iter().filter(|u| u.parse_error.is_none()) {
        for imp in imports(&u.python) {
            let top = imp.top_level();
            if local.contains(&top.to_ascii_lowercase()) {
                continue;
            }
            let hit = [top, imp.module.as_str()].into_iter().chain(p.distributions_for(&imp.module).iter().map(String::as_str).collect::<Vec<_>>())
                .any(|n| p.is_gpu_package(n));
            if hit {
                gpu.insert((u.path.clone(), top.to_string(), Some(imp.line)));
            }
        }
    }
    for name in ctx.models.deps.declared.keys() {
        if p.is_gpu_package(name) {
            for src in &ctx.models.deps.source_files {
                gpu.insert((src.clone(), name.clone(), None));
            }
        }
    }
    if gpu.is_empty() {
        return SubMetricResult::new(SubMetricId::HardwareRequirements, None, vec![Evidence::repo("no GPU packages detected")]);
    }
    let mut ev: Vec<Evidence> =
        gpu.into_iter().map(|(path, name, line)| Evidence::matched(path, line, name, "accelerator package")).collect();
    let mut declared = Vec::new();
    for (path, text) in doc_texts(ctx) {
        if let Some((n, m)) = text.lines().enumerate().find_map(|(i, l)| hardware_re().find(l).map(|m| (i + 1, m.as_str().to_string()))) {
            declared.push(Evidence::matched(path, Some(n), m, "hardware requirement documented"));
        }
    }
    for (path, text) in texts_of(ctx, &[FileKind::ContainerSpec]) {
        for (line, img) in container_facts(path, text).bases {
            if img.to_ascii_lowercase().contains("cuda") {
                declared.push(Evidence::matched(path, Some(line), img, "accelerator base image"));
            }
        }
    }
    let hit = !declared.is_empty();
    if !hit {
        ev.push(Evidence::repo("accelerator packages without documented hardware requirements"));
    }
    ev.extend(declared);
    SubMetricResult::new(SubMetricId::HardwareRequirements, Some(binary(hit)), ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        assert_eq!(seed_ratio(2, 4), Some(50.0));
        assert_eq!(seed_ratio(3, 3), Some(100.0));
        assert_eq!(seed_ratio(0, 0), None);
        assert_eq!(test_presence_score(0), 0.0);
        assert_eq!(test_presence_score(1), 50.0);
        assert_eq!(test_presence_score(3), 100.0);
    }

    #[test]
    fn config_file_names() {
        assert!(run_config_file("configs/train.yaml"));
        assert!(run_config_file("config.json"));
        assert!(run_config_file("setup.ini"));
        assert!(!run_config_file(".python-version"));
        assert!(!run_config_file("Snakefile.smk"));
        assert!(!run_config_file("metadata.json"));
    }

    #[test]
    fn hardware_mentions() {
        assert!(hardware_re().is_match("Requires an NVIDIA GPU"));
        assert!(hardware_re().is_match("needs 16 GB of RAM"));
        assert!(!hardware_re().is_match("programmatically"));
    }
}
