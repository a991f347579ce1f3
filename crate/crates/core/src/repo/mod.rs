//! Repository acquisition and the parsed models the analyzers read.

pub mod deps;
pub mod inventory;
pub mod notebook;
pub mod python;
pub mod readme;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use tempfile::TempDir;

pub use deps::{parse_dependency_files, ConstraintKind, DependencySpec, ManifestWarning};
pub use inventory::{classify_path, scan_directory, FileInventory, FileKind, InventoryEntry, ScanNotes};
pub use notebook::{CellKind, NotebookError, NotebookModel};
pub use readme::ReadmeModel;

/// Commit identifier recorded for plain directories.
pub const UNCOMMITTED: &str = "uncommitted";

#[derive(Debug, thiserror::Error)]
pub enum AcquisitionError {
    #[error("unreachable source: {0}")]
    Unreachable(String),
    #[error("clone failed for {repo}: {message}")]
    CloneFailed { repo: String, message: String },
    #[error("no analyzable files in {0}")]
    NoAnalyzableFiles(String),
    #[error("i/o error reading {path}: {message}")]
    Io { path: String, message: String },
}

/// An acquired repository. Immutable; clones are removed when the last
/// handle drops.
#[derive(Debug, Clone)]
pub struct RepoSnapshot {
    source: String,
    repo_id: String,
    commit_id: String,
    root: PathBuf,
    inventory: FileInventory,
    _clone: Option<Arc<TempDir>>,
}

impl RepoSnapshot {
    /// Inventories a directory in place without the emptiness check.
    pub fn from_directory(root: &Path, commit_id: &str) -> Result<Self, AcquisitionError> {
        if !root.is_dir() {
            return Err(AcquisitionError::Unreachable(root.display().to_string()));
        }
        let inventory = scan_directory(root)
            .map_err(|e| AcquisitionError::Io { path: root.display().to_string(), message: e.to_string() })?;
        Ok(RepoSnapshot {
            source: root.display().to_string(),
            repo_id: local_repo_id(root),
            commit_id: if commit_id.is_empty() { UNCOMMITTED.into() } else { commit_id.into() },
            root: root.to_path_buf(),
            inventory,
            _clone: None,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Filesystem-safe identifier (`owner__name` for URLs, directory name
    /// for local paths).
    pub fn repo_id(&self) -> &str {
        &self.repo_id
    }

    pub fn commit_id(&self) -> &str {
        &self.commit_id
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn inventory(&self) -> &FileInventory {
        &self.inventory
    }

    pub fn read_text(&self, rel: &str) -> Result<String, String> {
        let bytes = fs::read(inventory::absolute(&self.root, rel)).map_err(|e| e.to_string())?;
        String::from_utf8(bytes).map_err(|_| "not valid UTF-8".to_string())
    }
}

pub fn is_remote(source: &str) -> bool {
    source.contains("://") || source.starts_with("git@")
}

/// Acquires `source`: remote URLs are cloned (depth 1 when `shallow`),
/// local directories are inventoried in place and never modified.
pub fn acquire_repository(source: &str, shallow: bool) -> Result<RepoSnapshot, AcquisitionError> {
    let snapshot = if is_remote(source) {
        clone_remote(source, shallow)?
    } else {
        let root = Path::new(source);
        if !root.is_dir() {
            return Err(AcquisitionError::Unreachable(source.to_string()));
        }
        let commit = local_commit(root);
        let mut s = RepoSnapshot::from_directory(root, &commit)?;
        s.source = source.to_string();
        s
    };
    if snapshot.inventory.total() == 0 {
        return Err(AcquisitionError::NoAnalyzableFiles(source.to_string()));
    }
    Ok(snapshot)
}

fn git(args: &[&str], dir: Option<&Path>) -> std::io::Result<std::process::Output> {
    let mut cmd = Command::new("git");
    if let Some(d) = dir {
        cmd.arg("-C").arg(d);
    }
    cmd.args(args).env("GIT_TERMINAL_PROMPT", "0").env("GIT_ASKPASS", "true").output()
}

/// HEAD of a working tree whose root holds VCS metadata, else
/// [`UNCOMMITTED`].
fn local_commit(root: &Path) -> String {
    if !root.join(".git").exists() {
        return UNCOMMITTED.into();
    }
    match git(&["rev-parse", "HEAD"], Some(root)) {
        Ok(out) if out.status.success() => {
            let s = String::from_utf8_lossy(&out.stdout).trim().to_string();
            if s.is_empty() { UNCOMMITTED.into() } else { s }
        }
        _ => UNCOMMITTED.into(),
    }
}

fn clone_remote(source: &str, shallow: bool) -> Result<RepoSnapshot, AcquisitionError> {
    let tmp = tempfile::Builder::new()
        .prefix("readiness-clone-")
        .tempdir()
        .map_err(|e| AcquisitionError::Io { path: "temporary directory".into(), message: e.to_string() })?;
    let dest = tmp.path().join("repo");
    let dest_str = dest.to_string_lossy().into_owned();
    let mut args = vec!["clone", "--quiet", "--no-tags"];
    if shallow {
        args.extend(["--depth", "1"]);
    }
    args.extend(["--", source, dest_str.as_str()]);
    let out = git(&args, None).map_err(|e| AcquisitionError::CloneFailed {
        repo: source.to_string(),
        message: format!("cannot run git: {e}"),
    })?;
    if !out.status.success() {
        let message = String::from_utf8_lossy(&out.stderr).trim().to_string();
        let lower = message.to_ascii_lowercase();
        if ["could not resolve host", "does not exist", "not found", "does not appear to be a git repository"]
            .iter()
            .any(|m| lower.contains(m))
        {
            return Err(AcquisitionError::Unreachable(format!("{source}: {message}")));
        }
        return Err(AcquisitionError::CloneFailed { repo: source.to_string(), message });
    }
    let commit = local_commit(&dest);
    let inventory = scan_directory(&dest)
        .map_err(|e| AcquisitionError::Io { path: dest_str.clone(), message: e.to_string() })?;
    Ok(RepoSnapshot {
        source: source.to_string(),
        repo_id: remote_repo_id(source),
        commit_id: commit,
        root: dest,
        inventory,
        _clone: Some(Arc::new(tmp)),
    })
}

fn sanitize(s: &str) -> String {
    let out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    let out = out.trim_matches('.').to_string();
    if out.is_empty() { "repo".into() } else { out }
}

pub fn remote_repo_id(url: &str) -> String {
    let trimmed = url.trim_end_matches('/').trim_end_matches(".git");
    let parts: Vec<&str> = trimmed.split(['/', ':']).filter(|p| !p.is_empty()).collect();
    match parts.as_slice() {
        [.., owner, name] => format!("{}__{}", sanitize(owner), sanitize(name)),
        [name] => sanitize(name),
        [] => "repo".into(),
    }
}

pub fn local_repo_id(root: &Path) -> String {
    let canonical = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    canonical.file_name().map(|n| sanitize(&n.to_string_lossy())).unwrap_or_else(|| "repo".into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeUnitKind {
    Script,
    Test,
    Notebook,
}

/// A Python source file or notebook, reduced to scannable text.
#[derive(Debug, Clone)]
pub struct CodeUnit {
    pub path: String,
    pub kind: CodeUnitKind,
    /// Python source. For a malformed notebook this is the raw document so
    /// textual patterns still apply.
    pub python: String,
    /// Shell escapes from notebooks.
    pub shell: Vec<String>,
    pub parse_error: Option<String>,
}

/// Everything the analyzers read, parsed once per snapshot.
#[derive(Debug, Clone, Default)]
pub struct RepoModels {
    /// UTF-8 text of every scannable non-data file, by relative path.
    pub texts: BTreeMap<String, String>,
    pub notebooks: Vec<Result<NotebookModel, NotebookError>>,
    pub readmes: Vec<ReadmeModel>,
    pub deps: DependencySpec,
    pub code_units: Vec<CodeUnit>,
    pub skipped: Vec<SkippedFile>,
}

impl RepoModels {
    pub fn build(snapshot: &RepoSnapshot) -> Self {
        let inv = snapshot.inventory();
        let mut texts = BTreeMap::new();
        let mut skipped = Vec::new();
        let mut notebooks = Vec::new();
        let mut code_units = Vec::new();
        for e in inv.entries() {
            if e.kind == FileKind::DataFile {
                continue;
            }
            if let Some(w) = &e.warning {
                skipped.push(SkippedFile { path: e.path.clone(), reason: w.clone() });
                continue;
            }
            if !e.scannable() {
                skipped.push(SkippedFile { path: e.path.clone(), reason: "skipped: size".into() });
                continue;
            }
            let bytes = match fs::read(inventory::absolute(snapshot.root(), &e.path)) {
                Ok(b) => b,
                Err(err) => {
                    skipped.push(SkippedFile { path: e.path.clone(), reason: format!("unreadable: {err}") });
                    continue;
                }
            };
            if e.kind == FileKind::Notebook {
                let parsed = NotebookModel::parse_bytes(&e.path, &bytes);
                code_units.push(match &parsed {
                    Ok(nb) => CodeUnit {
                        path: e.path.clone(),
                        kind: CodeUnitKind::Notebook,
                        python: nb.python_source(),
                        shell: nb.shell_lines(),
                        parse_error: None,
                    },
                    Err(err) => CodeUnit {
                        path: e.path.clone(),
                        kind: CodeUnitKind::Notebook,
                        python: String::from_utf8_lossy(&bytes).into_owned(),
                        shell: Vec::new(),
                        parse_error: Some(err.reason.clone()),
                    },
                });
                notebooks.push(parsed);
                continue;
            }
            let Ok(text) = String::from_utf8(bytes) else {
                continue;
            };
            if matches!(e.kind, FileKind::PythonSource | FileKind::TestFile) {
                code_units.push(CodeUnit {
                    path: e.path.clone(),
                    kind: if e.kind == FileKind::TestFile { CodeUnitKind::Test } else { CodeUnitKind::Script },
                    python: text.clone(),
                    shell: Vec::new(),
                    parse_error: None,
                });
            }
            texts.insert(e.path.clone(), text);
        }
        let mut readmes: Vec<ReadmeModel> =
            inv.of_kind(FileKind::Readme).filter_map(|e| texts.get(&e.path).map(|t| ReadmeModel::parse(&e.path, t))).collect();
        readmes.sort_by_key(|r| (r.path.matches('/').count(), readme_rank(&r.path), r.path.clone()));
        let deps = parse_dependency_files(inv, |p| match texts.get(p) {
            Some(t) => Ok(t.clone()),
            None => snapshot.read_text(p),
        });
        RepoModels { texts, notebooks, readmes, deps, code_units, skipped }
    }

    /// The top-level README (shallowest, Markdown preferred).
    pub fn root_readme(&self) -> Option<&ReadmeModel> {
        self.readmes.first().filter(|r| !r.path.contains('/'))
    }

    pub fn parsed_notebooks(&self) -> impl Iterator<Item = &NotebookModel> {
        self.notebooks.iter().filter_map(|n| n.as_ref().ok())
    }

    pub fn text(&self, path: &str) -> Option<&str> {
        self.texts.get(path).map(String::as_str)
    }
}

fn readme_rank(path: &str) -> u8 {
    let lower = path.to_ascii_lowercase();
    if lower.ends_with(".md") || lower.ends_with(".markdown") {
        0
    } else if lower.ends_with(".rst") {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repo_ids() {
        assert_eq!(remote_repo_id("https://github.com/owner/name.git"), "owner__name");
        assert_eq!(remote_repo_id("git@github.com:owner/name.git"), "owner__name");
        assert_eq!(remote_repo_id("file:///tmp/x/my repo/"), "x__my_repo");
    }

    #[test]
    fn remote_detection() {
        assert!(is_remote("https://x/y"));
        assert!(is_remote("git@host:a/b"));
        assert!(!is_remote("/tmp/dir"));
    }

    #[test]
    fn nonexistent_path_is_unreachable() {
        let err = acquire_repository("/definitely/not/here", true).unwrap_err();
        assert!(matches!(err, AcquisitionError::Unreachable(_)));
        assert!(err.to_string().starts_with("unreachable source"));
    }

    #[test]
    fn plain_directory_is_uncommitted() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.py"), "x = 1\n").unwrap();
        let s = acquire_repository(dir.path().to_str().unwrap(), true).unwrap();
        assert_eq!(s.commit_id(), UNCOMMITTED);
        assert_eq!(s.inventory().total(), 1);
    }

    #[test]
    fn empty_directory_has_no_analyzable_files() {
        let dir = tempfile::tempdir().unwrap();
        let err = acquire_repository(dir.path().to_str().unwrap(), true).unwrap_err();
        assert!(matches!(err, AcquisitionError::NoAnalyzableFiles(_)));
        let s = RepoSnapshot::from_directory(dir.path(), UNCOMMITTED).unwrap();
        assert_eq!(s.inventory().total(), 0);
    }

    #[test]
    fn models_pick_root_readme_and_parse_notebooks() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("data")).unwrap();
        fs::write(dir.path().join("data/README.md"), "# Data\n").unwrap();
        fs::write(dir.path().join("README.rst"), "Title\n=====\n").unwrap();
        fs::write(dir.path().join("README.md"), "# Top\n").unwrap();
        fs::write(dir.path().join("bad.ipynb"), "{ not json").unwrap();
        fs::write(dir.path().join("main.py"), "import numpy\n").unwrap();
        let s = RepoSnapshot::from_directory(dir.path(), UNCOMMITTED).unwrap();
        let m = RepoModels::build(&s);
        assert_eq!(m.root_readme().unwrap().path, "README.md");
        assert_eq!(m.readmes.len(), 3);
        assert_eq!(m.notebooks.len(), 1);
        assert!(m.notebooks[0].is_err());
        assert_eq!(m.code_units.len(), 2);
        assert!(m.code_units.iter().any(|u| u.parse_error.is_some()));
    }
}
