//! Declared-dependency extraction from manifests and lockfiles.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::inventory::{FileInventory, FileKind};

/// Strength of the version constraint on a declared distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    None,
    Unbounded,
    Bounded,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestWarning {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencySpec {
    /// Normalized distribution name → strongest constraint seen.
    pub declared: BTreeMap<String, ConstraintKind>,
    /// Manifests and lockfiles that were read successfully.
    pub source_files: Vec<String>,
    pub has_lockfile: bool,
    pub runtime_version_declared: bool,
    /// Files that declared the interpreter version.
    pub runtime_sources: Vec<String>,
    pub warnings: Vec<ManifestWarning>,
}

impl DependencySpec {
    pub fn is_declared(&self, name: &str) -> bool {
        self.declared.contains_key(&normalize_name(name))
    }

    fn declare(&mut self, name: &str, kind: ConstraintKind) {
        let n = normalize_name(name);
        if n.is_empty() || n == "python" {
            return;
        }
        let e = self.declared.entry(n).or_insert(kind);
        if kind > *e {
            *e = kind;
        }
    }

    fn runtime(&mut self, path: &str) {
        self.runtime_version_declared = true;
        if !self.runtime_sources.iter().any(|p| p == path) {
            self.runtime_sources.push(path.to_string());
        }
    }
}

/// PEP 503 normalization: lowercase, runs of `-_.` collapsed to `-`.
pub fn normalize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut sep = false;
    for c in name.trim().chars() {
        if c == '-' || c == '_' || c == '.' {
            sep = true;
        } else {
            if sep && !out.is_empty() {
                out.push('-');
            }
            sep = false;
            out.push(c.to_ascii_lowercase());
        }
    }
    out
}

/// Reads every manifest and lockfile in the inventory. `read` returns the
/// text of a relative path, or an error message. Never fails as a whole;
/// unparseable files become warnings.
pub fn parse_dependency_files(
    inventory: &FileInventory,
    read: impl Fn(&str) -> Result<String, String>,
) -> DependencySpec {
    let mut spec = DependencySpec { has_lockfile: inventory.count(FileKind::Lockfile) > 0, ..Default::default() };
    let files = inventory
        .of_kind(FileKind::DependencyManifest)
        .chain(inventory.of_kind(FileKind::Lockfile))
        .map(|e| e.path.clone())
        .collect::<Vec<_>>();
    for path in files {
        let text = match read(&path) {
            Ok(t) => t,
            Err(message) => {
                spec.warnings.push(ManifestWarning { path, message });
                continue;
            }
        };
        match parse_manifest(&path, &text, &mut spec) {
            Ok(()) => spec.source_files.push(path),
            Err(message) => spec.warnings.push(ManifestWarning { path, message }),
        }
    }
    spec
}

fn parse_manifest(path: &str, text: &str, spec: &mut DependencySpec) -> Result<(), String> {
    let name = path.rsplit('/').next().unwrap_or(path).to_ascii_lowercase();
    let mut scratch = spec.clone();
    match name.as_str() {
        "pyproject.toml" => parse_pyproject(path, text, &mut scratch)?,
        "pipfile" => parse_pipfile(path, text, &mut scratch)?,
        "setup.py" => parse_setup_py(path, text, &mut scratch),
        "setup.cfg" => parse_setup_cfg(path, text, &mut scratch),
        "poetry.lock" | "pdm.lock" | "uv.lock" => parse_toml_lock(text, &mut scratch)?,
        "pipfile.lock" => parse_pipfile_lock(text, &mut scratch)?,
        n if n.starts_with("environment") => parse_conda_env(path, text, &mut scratch)?,
        n if n.contains("conda-lock") => parse_conda_lock(text, &mut scratch)?,
        n if n.ends_with(".lock") => {}
        _ => parse_requirements(text, &mut scratch),
    }
    *spec = scratch;
    Ok(())
}

fn requirement_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([A-Za-z0-9][A-Za-z0-9._-]*)\s*(\[[^\]]*\])?\s*(.*)$").unwrap())
}

fn egg_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#egg=([A-Za-z0-9][A-Za-z0-9._-]*)").unwrap())
}

/// Classifies a PEP 440 specifier set such as `>=1.0,<2` or `==1.2.3`.
pub fn classify_specifiers(spec: &str) -> ConstraintKind {
    let spec = spec.trim();
    if spec.is_empty() {
        return ConstraintKind::None;
    }
    let (mut exact, mut upper, mut lower, mut other) = (false, false, false, false);
    for part in spec.split(',') {
        let p = part.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if let Some(v) = p.strip_prefix("===").or_else(|| p.strip_prefix("==")) {
            if v.contains('*') {
                upper = true;
            } else {
                exact = true;
            }
        } else if p.starts_with("~=") || p.starts_with('<') {
            upper = true;
        } else if p.starts_with(">=") || p.starts_with('>') {
            lower = true;
        } else if !p.is_empty() {
            other = true;
        }
    }
    if exact {
        ConstraintKind::Exact
    } else if upper {
        ConstraintKind::Bounded
    } else if lower || other {
        ConstraintKind::Unbounded
    } else {
        ConstraintKind::None
    }
}

/// Parses one PEP 508 requirement string.
pub fn parse_requirement(line: &str) -> Option<(String, ConstraintKind)> {
    let line = strip_comment(line).trim();
    if line.is_empty() {
        return None;
    }
    if let Some(c) = requirement_re().captures(line) {
        if c.get(3).is_some_and(|m| m.as_str().trim_start().starts_with('@')) {
            return Some((c[1].to_string(), ConstraintKind::Exact));
        }
    }
    if line.starts_with('-') || line.contains("://") || line.starts_with("git+") {
        // Options and bare URLs only name a distribution through `#egg=`.
        let name = egg_re().captures(line)?.get(1)?.as_str().to_string();
        let kind = if line.contains('@') { ConstraintKind::Exact } else { ConstraintKind::None };
        return Some((name, kind));
    }
    let line = line.split(';').next().unwrap_or("").trim();
    let c = requirement_re().captures(line)?;
    let name = c[1].to_string();
    let rest = c.get(3).map_or("", |m| m.as_str()).trim();
    if rest.starts_with('@') {
        return Some((name, ConstraintKind::Exact));
    }
    Some((name, classify_specifiers(rest)))
}

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

fn parse_requirements(text: &str, spec: &mut DependencySpec) {
    let mut joined = String::new();
    for raw in text.lines() {
        if let Some(stripped) = raw.strip_suffix('\\') {
            joined.push_str(stripped);
            continue;
        }
        joined.push_str(raw);
        if let Some((name, kind)) = parse_requirement(&joined) {
            spec.declare(&name, kind);
        }
        joined.clear();
    }
}

/// Conda match spec: `numpy`, `numpy=1.24`, `numpy==1.24.0`, `numpy 1.24.*`,
/// `conda-forge::numpy>=1.2`.
fn parse_conda_spec(s: &str) -> Option<(String, ConstraintKind)> {
    let s = s.trim();
    let s = s.rsplit("::").next().unwrap_or(s);
    let name_len = s.find(|c: char| !(c.is_ascii_alphanumeric() || "._-".contains(c))).unwrap_or(s.len());
    if name_len == 0 {
        return None;
    }
    let name = &s[..name_len];
    let rest = s[name_len..].trim();
    let kind = if rest.is_empty() {
        ConstraintKind::None
    } else if let Some(v) = rest.strip_prefix("==") {
        if v.contains('*') { ConstraintKind::Bounded } else { ConstraintKind::Exact }
    } else if rest.starts_with(['<', '>', '~', '!']) {
        classify_specifiers(rest)
    } else {
        let v = rest.trim_start_matches('=');
        let version = v.split('=').next().unwrap_or("");
        if version.contains('*') || version.contains(',') || version.contains('|') {
            ConstraintKind::Bounded
        } else if version.split('.').count() >= 3 || v.contains('=') {
            ConstraintKind::Exact
        } else {
            // `numpy=1.24` matches any 1.24.x
            ConstraintKind::Bounded
        }
    };
    Some((name.to_string(), kind))
}

fn parse_conda_env(path: &str, text: &str, spec: &mut DependencySpec) -> Result<(), String> {
    let doc: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| format!("invalid YAML: {e}"))?;
    let Some(deps) = doc.get("dependencies") else {
        return Ok(());
    };
    let deps = deps.as_sequence().ok_or("`dependencies` is not a list")?;
    for d in deps {
        match d {
            serde_yaml::Value::String(s) => {
                if let Some((name, kind)) = parse_conda_spec(s) {
                    if normalize_name(&name) == "python" {
                        if kind != ConstraintKind::None {
                            spec.runtime(path);
                        }
                    } else {
                        spec.declare(&name, kind);
                    }
                }
            }
            serde_yaml::Value::Mapping(m) => {
                if let Some(pip) = m.get("pip").and_then(|p| p.as_sequence()) {
                    for p in pip.iter().filter_map(|p| p.as_str()) {
                        if let Some((name, kind)) = parse_requirement(p) {
                            spec.declare(&name, kind);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn poetry_constraint(v: &toml::Value) -> ConstraintKind {
    let s = match v {
        toml::Value::String(s) => s.as_str(),
        toml::Value::Table(t) => {
            if t.contains_key("rev") || t.contains_key("tag") {
                return ConstraintKind::Exact;
            }
            match t.get("version").and_then(|v| v.as_str()) {
                Some(s) => s,
                None => return ConstraintKind::None,
            }
        }
        toml::Value::Array(items) => {
            return items.iter().map(poetry_constraint).max().unwrap_or(ConstraintKind::None);
        }
        _ => return ConstraintKind::None,
    };
    let s = s.trim();
    if s.is_empty() || s == "*" {
        ConstraintKind::None
    } else if s.starts_with('^') || s.starts_with('~') && !s.starts_with("~=") {
        ConstraintKind::Bounded
    } else if s.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        if s.contains('*') { ConstraintKind::Bounded } else { ConstraintKind::Exact }
    } else {
        classify_specifiers(s)
    }
}

fn parse_pyproject(path: &str, text: &str, spec: &mut DependencySpec) -> Result<(), String> {
    let doc: toml::Table = text.parse().map_err(|e| format!("invalid TOML: {e}"))?;
    if let Some(project) = doc.get("project").and_then(|p| p.as_table()) {
        if project.contains_key("requires-python") {
            spec.runtime(path);
        }
        let mut lists: Vec<&toml::Value> = project.get("dependencies").into_iter().collect();
        if let Some(opt) = project.get("optional-dependencies").and_then(|o| o.as_table()) {
            lists.extend(opt.values());
        }
        for list in lists {
            for r in list.as_array().into_iter().flatten().filter_map(|v| v.as_str()) {
                if let Some((name, kind)) = parse_requirement(r) {
                    spec.declare(&name, kind);
                }
            }
        }
    }
    if let Some(groups) = doc.get("dependency-groups").and_then(|g| g.as_table()) {
        for list in groups.values() {
            for r in list.as_array().into_iter().flatten().filter_map(|v| v.as_str()) {
                if let Some((name, kind)) = parse_requirement(r) {
                    spec.declare(&name, kind);
                }
            }
        }
    }
    if let Some(poetry) = doc.get("tool").and_then(|t| t.get("poetry")).and_then(|p| p.as_table()) {
        let mut tables: Vec<&toml::Table> = Vec::new();
        for key in ["dependencies", "dev-dependencies"] {
            if let Some(t) = poetry.get(key).and_then(|d| d.as_table()) {
                tables.push(t);
            }
        }
        if let Some(groups) = poetry.get("group").and_then(|g| g.as_table()) {
            for g in groups.values() {
                if let Some(t) = g.get("dependencies").and_then(|d| d.as_table()) {
                    tables.push(t);
                }
            }
        }
        for t in tables {
            for (name, v) in t {
                if normalize_name(name) == "python" {
                    spec.runtime(path);
                } else {
                    spec.declare(name, poetry_constraint(v));
                }
            }
        }
    }
    Ok(())
}

fn parse_pipfile(path: &str, text: &str, spec: &mut DependencySpec) -> Result<(), String> {
    let doc: toml::Table = text.parse().map_err(|e| format!("invalid TOML: {e}"))?;
    for key in ["packages", "dev-packages"] {
        if let Some(t) = doc.get(key).and_then(|d| d.as_table()) {
            for (name, v) in t {
                let kind = match v {
                    toml::Value::String(s) if s.trim() == "*" => ConstraintKind::None,
                    toml::Value::String(s) => classify_specifiers(s),
                    toml::Value::Table(t) => match t.get("version").and_then(|v| v.as_str()) {
                        Some(s) if s.trim() != "*" => classify_specifiers(s),
                        _ if t.contains_key("ref") => ConstraintKind::Exact,
                        _ => ConstraintKind::None,
                    },
                    _ => ConstraintKind::None,
                };
                spec.declare(name, kind);
            }
        }
    }
    if let Some(req) = doc.get("requires").and_then(|r| r.as_table()) {
        if req.contains_key("python_version") || req.contains_key("python_full_version") {
            spec.runtime(path);
        }
    }
    Ok(())
}

fn string_literal_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#""([^"\\]*)"|'([^'\\]*)'"#).unwrap())
}

fn install_requires_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)(?:install_requires|tests_require)\s*=\s*\[(.*?)\]").unwrap())
}

fn parse_setup_py(path: &str, text: &str, spec: &mut DependencySpec) {
    for c in install_requires_re().captures_iter(text) {
        for lit in string_literal_re().captures_iter(&c[1]) {
            let s = lit.get(1).or_else(|| lit.get(2)).map_or("", |m| m.as_str());
            if let Some((name, kind)) = parse_requirement(s) {
                spec.declare(&name, kind);
            }
        }
    }
    if text.contains("python_requires") {
        spec.runtime(path);
    }
}

fn parse_setup_cfg(path: &str, text: &str, spec: &mut DependencySpec) {
    let mut section = String::new();
    let mut in_requires = false;
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            section = t[1..t.len() - 1].trim().to_string();
            in_requires = false;
            continue;
        }
        let indented = line.starts_with([' ', '\t']);
        if in_requires && indented {
            if let Some((name, kind)) = parse_requirement(t) {
                spec.declare(&name, kind);
            }
            continue;
        }
        in_requires = false;
        if section != "options" && section != "options.extras_require" {
            continue;
        }
        if let Some((key, value)) = t.split_once('=') {
            let key = key.trim();
            if key == "python_requires" {
                spec.runtime(path);
            } else if key == "install_requires" || section == "options.extras_require" {
                in_requires = true;
                for item in value.split(';').next().into_iter() {
                    if let Some((name, kind)) = parse_requirement(item) {
                        spec.declare(&name, kind);
                    }
                }
            }
        }
    }
}

fn parse_toml_lock(text: &str, spec: &mut DependencySpec) -> Result<(), String> {
    let doc: toml::Table = text.parse().map_err(|e| format!("invalid TOML: {e}"))?;
    for p in doc.get("package").and_then(|p| p.as_array()).into_iter().flatten() {
        if let Some(name) = p.get("name").and_then(|n| n.as_str()) {
            spec.declare(name, ConstraintKind::Exact);
        }
    }
    Ok(())
}

fn parse_pipfile_lock(text: &str, spec: &mut DependencySpec) -> Result<(), String> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    for key in ["default", "develop"] {
        if let Some(obj) = doc.get(key).and_then(|d| d.as_object()) {
            for name in obj.keys() {
                spec.declare(name, ConstraintKind::Exact);
            }
        }
    }
    Ok(())
}

fn parse_conda_lock(text: &str, spec: &mut DependencySpec) -> Result<(), String> {
    let doc: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| format!("invalid YAML: {e}"))?;
    for p in doc.get("package").and_then(|p| p.as_sequence()).into_iter().flatten() {
        if let Some(name) = p.get("name").and_then(|n| n.as_str()) {
            spec.declare(name, ConstraintKind::Exact);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn parse(files: &[(&str, &str)]) -> DependencySpec {
        let inv = FileInventory::from_paths(files.iter().map(|(p, _)| *p));
        let map: HashMap<_, _> = files.iter().cloned().collect();
        parse_dependency_files(&inv, |p| map.get(p).map(|s| s.to_string()).ok_or_else(|| "missing".into()))
    }

    #[test]
    fn exact_pin() {
        let s = parse(&[("requirements.txt", "numpy==1.24.0\n")]);
        assert_eq!(s.declared.get("numpy"), Some(&ConstraintKind::Exact));
        assert!(!s.has_lockfile);
    }

    #[test]
    fn lockfile_flag_independent_of_manifest() {
        let s = parse(&[("requirements.txt", "numpy\n"), ("poetry.lock", "[[package]]\nname = \"numpy\"\nversion = \"1.0\"\n")]);
        assert!(s.has_lockfile);
        assert_eq!(s.declared.get("numpy"), Some(&ConstraintKind::Exact));
        let s = parse(&[("Pipfile.lock", "not json")]);
        assert!(s.has_lockfile);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn no_dependency_files() {
        let s = parse(&[("main.py", "import numpy")]);
        assert!(s.declared.is_empty());
        assert!(s.source_files.is_empty());
    }

    #[test]
    fn requirement_line_variants() {
        assert_eq!(parse_requirement("Scikit_Learn[extra] >=1.0, <2 ; python_version>'3'"), Some(("Scikit_Learn".into(), ConstraintKind::Bounded)));
        assert_eq!(parse_requirement("pandas>=1.0  # comment"), Some(("pandas".into(), ConstraintKind::Unbounded)));
        assert_eq!(parse_requirement("torch~=2.0"), Some(("torch".into(), ConstraintKind::Bounded)));
        assert_eq!(parse_requirement("scipy"), Some(("scipy".into(), ConstraintKind::None)));
        assert_eq!(parse_requirement("numpy==1.*"), Some(("numpy".into(), ConstraintKind::Bounded)));
        assert_eq!(parse_requirement("-r other.txt"), None);
        assert_eq!(parse_requirement("-e git+https://x/y.git@abc#egg=mypkg"), Some(("mypkg".into(), ConstraintKind::Exact)));
        assert_eq!(parse_requirement("pkg @ https://x/y.whl"), Some(("pkg".into(), ConstraintKind::Exact)));
        assert_eq!(parse_requirement("# only comment"), None);
    }

    #[test]
    fn strongest_constraint_wins_and_names_normalize() {
        let s = parse(&[("requirements.txt", "Scikit-Learn\n"), ("requirements-dev.txt", "scikit_learn==1.3.0\n")]);
        assert_eq!(s.declared.get("scikit-learn"), Some(&ConstraintKind::Exact));
        assert!(s.is_declared("SCIKIT.learn"));
    }

    #[test]
    fn conda_environment() {
        let env = "name: x\ndependencies:\n  - python=3.10\n  - numpy=1.24.0\n  - conda-forge::pandas=1.5\n  - scipy\n  - pip:\n    - requests==2.31.0\n";
        let s = parse(&[("environment.yml", env)]);
        assert!(s.runtime_version_declared);
        assert_eq!(s.declared.get("numpy"), Some(&ConstraintKind::Exact));
        assert_eq!(s.declared.get("pandas"), Some(&ConstraintKind::Bounded));
        assert_eq!(s.declared.get("scipy"), Some(&ConstraintKind::None));
        assert_eq!(s.declared.get("requests"), Some(&ConstraintKind::Exact));
        assert!(!s.declared.contains_key("python"));
    }

    #[test]
    fn pyproject_pep621_and_poetry() {
        let t = "[project]\nname='x'\nrequires-python='>=3.9'\ndependencies=['numpy>=1.2','pandas==2.0.0']\n[tool.poetry.dependencies]\npython='^3.9'\ntorch='^2.0'\nscipy='1.11.0'\n";
        let s = parse(&[("pyproject.toml", t)]);
        assert!(s.runtime_version_declared);
        assert_eq!(s.declared.get("numpy"), Some(&ConstraintKind::Unbounded));
        assert_eq!(s.declared.get("pandas"), Some(&ConstraintKind::Exact));
        assert_eq!(s.declared.get("torch"), Some(&ConstraintKind::Bounded));
        assert_eq!(s.declared.get("scipy"), Some(&ConstraintKind::Exact));
    }

    #[test]
    fn setup_py_and_cfg() {
        let py = "setup(name='x', python_requires='>=3.8', install_requires=[\n 'numpy>=1.0',\n \"requests\",\n])";
        let s = parse(&[("setup.py", py)]);
        assert_eq!(s.declared.len(), 2);
        assert!(s.runtime_version_declared);
        let cfg = "[metadata]\nname = x\n[options]\ninstall_requires =\n    numpy==1.0\n    pandas\npython_requires = >=3.8\n";
        let s = parse(&[("setup.cfg", cfg)]);
        assert_eq!(s.declared.get("numpy"), Some(&ConstraintKind::Exact));
        assert_eq!(s.declared.get("pandas"), Some(&ConstraintKind::None));
        assert!(s.runtime_version_declared);
    }

    #[test]
    fn pipfile() {
        let t = "[packages]\nnumpy = \"==1.0\"\nrequests = \"*\"\n[requires]\npython_version = \"3.9\"\n";
        let s = parse(&[("Pipfile", t)]);
        assert_eq!(s.declared.get("numpy"), Some(&ConstraintKind::Exact));
        assert_eq!(s.declared.get("requests"), Some(&ConstraintKind::None));
        assert!(s.runtime_version_declared);
    }

    #[test]
    fn unparseable_manifest_is_skipped_with_warning() {
        let s = parse(&[("pyproject.toml", "[project\nbroken"), ("requirements.txt", "numpy\n")]);
        assert_eq!(s.warnings.len(), 1);
        assert_eq!(s.warnings[0].path, "pyproject.toml");
        assert_eq!(s.source_files, vec!["requirements.txt"]);
        assert!(s.is_declared("numpy"));
    }
}
