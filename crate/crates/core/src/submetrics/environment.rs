//! E: environment specification.

use std::sync::OnceLock;

use regex::Regex;

use super::support::{lower_name, lower_stem, make_targets, texts_of};
use super::{binary, AnalysisContext, Evidence, SubMetricId, SubMetricResult};
use crate::repo::{ConstraintKind, FileKind};

pub fn dep_pinning(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let deps = &ctx.models.deps;
    let mut ev: Vec<Evidence> = deps
        .warnings
        .iter()
        .map(|w| Evidence::file(&w.path, format!("skipped manifest: {}", w.message)))
        .collect();
    let lockfiles: Vec<_> = inv.of_kind(FileKind::Lockfile).collect();
    let score = if !lockfiles.is_empty() {
        ev.extend(lockfiles.iter().map(|e| Evidence::file(&e.path, "lockfile present")));
        100.0
    } else if !deps.declared.is_empty() {
        let exact = deps.declared.values().filter(|k| **k == ConstraintKind::Exact).count();
        let n = deps.declared.len();
        let note = format!("{exact} of {n} declared distributions pinned exactly");
        ev.extend(deps.source_files.iter().map(|p| Evidence::file(p, note.clone())));
        if exact == n {
            75.0
        } else if exact > 0 {
            40.0
        } else {
            25.0
        }
    } else if inv.count(FileKind::DependencyManifest) > 0 {
        ev.extend(
            inv.of_kind(FileKind::DependencyManifest)
                .map(|e| Evidence::file(&e.path, "manifest present, no pinned distributions")),
        );
        25.0
    } else {
        ev.push(Evidence::repo("no dependency files"));
        0.0
    };
    SubMetricResult::new(SubMetricId::DepPinning, Some(score), ev)
}

fn from_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*FROM\s+(?:--\S+\s+)*(\S+)(?:\s+AS\s+(\S+))?").unwrap())
}

fn apptainer_from_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*From:\s*(\S+)").unwrap())
}

fn install_step_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\b(pip3?\s+install|python3?\s+-m\s+pip\s+install|conda\s+(install|env\s+(create|update))|mamba\s+(install|env)|micromamba\s+(install|create)|apt(-get)?\s+(-\S+\s+)*install|apk\s+add|yum\s+install|dnf\s+install|poetry\s+install|pipenv\s+install|uv\s+(pip|sync)|setup\.py\s+install|install\.packages|npm\s+install|make\s+install)",
        )
        .unwrap()
    })
}

/// Whether an image reference names a fixed version (a non-`latest` tag or a digest).
pub(crate) fn image_pinned(image: &str) -> bool {
    if image.contains("@sha256:") {
        return true;
    }
    if image.eq_ignore_ascii_case("scratch") {
        return true;
    }
    let last = image.rsplit('/').next().unwrap_or(image);
    match last.split_once(':') {
        Some((_, tag)) => !tag.is_empty() && tag != "latest" && !tag.contains('$'),
        None => false,
    }
}

#[derive(Debug, Default)]
pub(crate) struct ContainerFacts {
    /// (line, image) for each external base image.
    pub bases: Vec<(usize, String)>,
    pub install_line: Option<usize>,
}

impl ContainerFacts {
    pub fn pinned(&self) -> bool {
        !self.bases.is_empty() && self.bases.iter().all(|(_, img)| image_pinned(img))
    }
}

pub(crate) fn container_facts(path: &str, text: &str) -> ContainerFacts {
    let mut facts = ContainerFacts::default();
    let name = lower_name(path);
    if name.ends_with(".json") {
        // devcontainer configuration; allow line comments
        let cleaned: String = text
            .lines()
            .filter(|l| !l.trim_start().starts_with("//"))
            .collect::<Vec<_>>()
            .join("\n");
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&cleaned) {
            if let Some(img) = v.get("image").and_then(|i| i.as_str()) {
                facts.bases.push((1, img.to_string()));
            }
            if ["postCreateCommand", "onCreateCommand", "updateContentCommand"].iter().any(|k| v.get(k).is_some()) {
                facts.install_line = Some(1);
            }
        }
        return facts;
    }
    let mut stages: Vec<String> = Vec::new();
    let mut in_post = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(c) = from_re().captures(line) {
            let img = c[1].to_string();
            if !stages.iter().any(|s| s.eq_ignore_ascii_case(&img)) {
                facts.bases.push((n, img));
            }
            if let Some(alias) = c.get(2) {
                stages.push(alias.as_str().to_string());
            }
            continue;
        }
        if let Some(c) = apptainer_from_re().captures(line) {
            facts.bases.push((n, c[1].to_string()));
            continue;
        }
        let t = line.trim_start();
        if t.starts_with('%') {
            in_post = t.starts_with("%post");
            continue;
        }
        let is_run = t.len() >= 4 && t[..4].eq_ignore_ascii_case("RUN ");
        if (is_run || in_post || line.starts_with([' ', '\t'])) && install_step_re().is_match(line) && facts.install_line.is_none() {
            facts.install_line = Some(n);
        }
    }
    facts
}

pub fn container_spec(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let mut ev = Vec::new();
    let mut best = 0.0;
    for e in inv.of_kind(FileKind::ContainerSpec) {
        let Some(text) = ctx.models.text(&e.path) else {
            ev.push(Evidence::file(&e.path, "container file present, not scanned"));
            best = f64::max(best, 60.0);
            continue;
        };
        let facts = container_facts(&e.path, text);
        if facts.pinned() && facts.install_line.is_some() {
            let (line, img) = &facts.bases[0];
            ev.push(Evidence::matched(&e.path, Some(*line), img.clone(), "pinned base image with install steps"));
            best = 100.0;
        } else {
            let note = match (facts.pinned(), facts.install_line.is_some()) {
                (false, _) => "container file present, base image not pinned",
                (true, false) => "container file present, no install steps",
                _ => unreachable!(),
            };
            ev.push(Evidence::file(&e.path, note));
            best = f64::max(best, 60.0);
        }
    }
    if ev.is_empty() {
        ev.push(Evidence::repo("no container specification"));
    }
    SubMetricResult::new(SubMetricId::ContainerSpec, Some(best), ev)
}

const BOOTSTRAP_TARGETS: &[&str] = &[
    "install", "setup", "env", "environment", "venv", "virtualenv", "conda", "conda-env", "conda_env", "deps",
    "dependencies", "requirements", "init", "bootstrap", "create_environment", "create-env", "create_env",
];

fn bootstrap_script(stem: &str) -> bool {
    stem.contains("install")
        || stem.starts_with("setup")
        || stem.starts_with("bootstrap")
        || stem.contains("env")
        || stem.starts_with("prepare")
}

pub fn env_bootstrap(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let mut ev = Vec::new();
    for e in inv.entries() {
        let stem = lower_stem(&e.path);
        let hit = match e.kind {
            FileKind::ShellScript => bootstrap_script(&stem),
            FileKind::PythonSource => stem.starts_with("install") || stem.starts_with("bootstrap"),
            _ => lower_name(&e.path) == "postbuild",
        };
        if hit {
            ev.push(Evidence::file(&e.path, "environment bootstrap script"));
        }
    }
    for (path, text) in texts_of(ctx, &[FileKind::Makefile]) {
        for t in make_targets(text) {
            if BOOTSTRAP_TARGETS.contains(&t.name.to_ascii_lowercase().as_str()) {
                ev.push(Evidence::matched(path, Some(t.line), t.name.clone(), "environment make target"));
            }
        }
    }
    let hit = !ev.is_empty();
    if !hit {
        ev.push(Evidence::repo("no one-command environment setup"));
    }
    SubMetricResult::new(SubMetricId::EnvBootstrap, Some(binary(hit)), ev)
}

fn python_image(image: &str) -> bool {
    let last = image.rsplit('/').next().unwrap_or(image);
    match last.split_once(':') {
        Some((repo, tag)) => {
            matches!(repo.to_ascii_lowercase().as_str(), "python" | "pypy") && tag.starts_with(|c: char| c.is_ascii_digit())
        }
        None => false,
    }
}

pub fn runtime_version(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let inv = ctx.snapshot.inventory();
    let mut ev = Vec::new();
    for e in inv.entries() {
        let name = lower_name(&e.path);
        match name.as_str() {
            ".python-version" | "runtime.txt" => ev.push(Evidence::file(&e.path, "runtime version file")),
            ".tool-versions" => {
                if ctx.models.text(&e.path).is_some_and(|t| t.lines().any(|l| l.trim_start().starts_with("python"))) {
                    ev.push(Evidence::file(&e.path, "runtime version file"));
                }
            }
            _ => {}
        }
    }
    for p in &ctx.models.deps.runtime_sources {
        ev.push(Evidence::file(p, "interpreter version declared in project metadata"));
    }
    for (path, text) in texts_of(ctx, &[FileKind::ContainerSpec]) {
        for (line, img) in container_facts(path, text).bases {
            if python_image(&img) {
                ev.push(Evidence::matched(path, Some(line), img, "pinned interpreter base image"));
            }
        }
    }
    let hit = !ev.is_empty();
    if !hit {
        ev.push(Evidence::repo("no runtime version declaration"));
    }
    SubMetricResult::new(SubMetricId::RuntimeVersion, Some(binary(hit)), ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_pins() {
        assert!(image_pinned("python:3.10-slim"));
        assert!(image_pinned("registry:5000/org/img:1.2"));
        assert!(image_pinned("ubuntu@sha256:abc"));
        assert!(!image_pinned("ubuntu"));
        assert!(!image_pinned("ubuntu:latest"));
        assert!(!image_pinned("registry:5000/org/img"));
        assert!(!image_pinned("python:${PY}"));
    }

    #[test]
    fn dockerfile_facts() {
        let f = container_facts("Dockerfile", "FROM python:3.10 AS build\nRUN pip install -r requirements.txt\nFROM build\n");
        assert!(f.pinned());
        assert_eq!(f.install_line, Some(2));
        let f = container_facts("Dockerfile", "FROM ubuntu\nCOPY . /app\n");
        assert!(!f.pinned());
        assert_eq!(f.install_line, None);
        let f = container_facts("Dockerfile", "FROM ubuntu:22.04\nRUN apt-get update && \\\n    apt-get install -y git\n");
        assert_eq!(f.install_line, Some(3));
    }

    #[test]
    fn apptainer_definition() {
        let f = container_facts("env.def", "Bootstrap: docker\nFrom: python:3.11\n\n%post\n    pip install numpy\n");
        assert!(f.pinned());
        assert_eq!(f.install_line, Some(5));
    }

    #[test]
    fn python_base_images() {
        assert!(python_image("python:3.9-slim"));
        assert!(python_image("docker.io/library/python:3.12"));
        assert!(!python_image("python:latest"));
        assert!(!python_image("continuumio/miniconda3:4.10.3"));
    }
}
