//! Total, deterministic partition of a repository's files into kinds.
//!
//! Rules are applied in the order of [`classify_path`]; the first match wins.
//! Extensionless files are sniffed for a shebang line. Bump
//! [`CLASSIFIER_VERSION`] whenever a rule changes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

pub const CLASSIFIER_VERSION: u32 = 1;

/// Files larger than this are inventoried but never content-scanned.
pub const MAX_SCAN_BYTES: u64 = 5 * 1024 * 1024;

const VCS_DIRS: &[&str] = &[".git", ".hg", ".svn"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    Notebook,
    PythonSource,
    Readme,
    DependencyManifest,
    Lockfile,
    ContainerSpec,
    CiConfig,
    Makefile,
    ShellScript,
    ConfigFile,
    DataFile,
    License,
    Citation,
    Codemeta,
    TestFile,
    Other,
}

impl FileKind {
    pub const ALL: [FileKind; 16] = [
        FileKind::Notebook,
        FileKind::PythonSource,
        FileKind::Readme,
        FileKind::DependencyManifest,
        FileKind::Lockfile,
        FileKind::ContainerSpec,
        FileKind::CiConfig,
        FileKind::Makefile,
        FileKind::ShellScript,
        FileKind::ConfigFile,
        FileKind::DataFile,
        FileKind::License,
        FileKind::Citation,
        FileKind::Codemeta,
        FileKind::TestFile,
        FileKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FileKind::Notebook => "notebook",
            FileKind::PythonSource => "python_source",
            FileKind::Readme => "readme",
            FileKind::DependencyManifest => "dependency_manifest",
            FileKind::Lockfile => "lockfile",
            FileKind::ContainerSpec => "container_spec",
            FileKind::CiConfig => "ci_config",
            FileKind::Makefile => "makefile",
            FileKind::ShellScript => "shell_script",
            FileKind::ConfigFile => "config_file",
            FileKind::DataFile => "data_file",
            FileKind::License => "license",
            FileKind::Citation => "citation",
            FileKind::Codemeta => "codemeta",
            FileKind::TestFile => "test_file",
            FileKind::Other => "other",
        }
    }
}

impl fmt::Display for FileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryEntry {
    /// Path relative to the repository root, `/`-separated.
    pub path: String,
    pub kind: FileKind,
    pub size: u64,
    /// Set when the file could not be read for sniffing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl InventoryEntry {
    pub fn scannable(&self) -> bool {
        self.size <= MAX_SCAN_BYTES && self.warning.is_none()
    }
}

/// Things deliberately not inventoried.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanNotes {
    pub symlinks_skipped: Vec<String>,
    pub submodules_skipped: Vec<String>,
    pub oversized: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileInventory {
    entries: Vec<InventoryEntry>,
    by_kind: BTreeMap<FileKind, Vec<usize>>,
    notes: ScanNotes,
}

impl FileInventory {
    /// Builds an inventory from already-classified entries. Entries are
    /// sorted by path.
    pub fn from_entries(mut entries: Vec<InventoryEntry>, notes: ScanNotes) -> Self {
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        entries.dedup_by(|a, b| a.path == b.path);
        let mut by_kind: BTreeMap<FileKind, Vec<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_kind.entry(e.kind).or_default().push(i);
        }
        FileInventory { entries, by_kind, notes }
    }

    /// Classifies bare relative paths without touching the filesystem.
    pub fn from_paths<S: AsRef<str>>(paths: impl IntoIterator<Item = S>) -> Self {
        let entries = paths
            .into_iter()
            .map(|p| {
                let path = p.as_ref().replace('\\', "/");
                InventoryEntry { kind: classify_path(&path, None), path, size: 0, warning: None }
            })
            .collect();
        Self::from_entries(entries, ScanNotes::default())
    }

    pub fn entries(&self) -> &[InventoryEntry] {
        &self.entries
    }

    pub fn notes(&self) -> &ScanNotes {
        &self.notes
    }

    pub fn of_kind(&self, kind: FileKind) -> impl Iterator<Item = &InventoryEntry> {
        self.by_kind.get(&kind).into_iter().flatten().map(move |&i| &self.entries[i])
    }

    pub fn count(&self, kind: FileKind) -> usize {
        self.by_kind.get(&kind).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> BTreeMap<FileKind, usize> {
        FileKind::ALL.iter().map(|&k| (k, self.count(k))).collect()
    }

    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, path: &str) -> Option<&InventoryEntry> {
        self.entries
            .binary_search_by(|e| e.path.as_str().cmp(path))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn contains(&self, path: &str) -> bool {
        self.get(path).is_some()
    }
}

/// Walks `root` and classifies every regular file. Never fails on an
/// individual file; unreadable files become [`FileKind::Other`] with a warning.
pub fn scan_directory(root: &Path) -> std::io::Result<FileInventory> {
    let mut entries = Vec::new();
    let mut notes = ScanNotes::default();
    let walker = WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            if e.depth() == 0 {
                return true;
            }
            let name = e.file_name().to_string_lossy();
            !VCS_DIRS.contains(&name.as_ref())
        });
    for item in walker {
        let entry = match item {
            Ok(e) => e,
            Err(err) => {
                if let Some(p) = err.path() {
                    if let Ok(rel) = p.strip_prefix(root) {
                        entries.push(InventoryEntry {
                            path: rel_string(rel),
                            kind: FileKind::Other,
                            size: 0,
                            warning: Some(format!("unreadable: {err}")),
                        });
                    }
                }
                continue;
            }
        };
        if entry.depth() == 0 {
            continue;
        }
        let rel = rel_string(entry.path().strip_prefix(root).unwrap_or(entry.path()));
        let ft = entry.file_type();
        if ft.is_symlink() {
            notes.symlinks_skipped.push(rel);
            continue;
        }
        if ft.is_dir() {
            continue;
        }
        if !ft.is_file() {
            continue;
        }
        let size = entry.metadata().map(|m| m.len()).unwrap_or(0);
        let (kind, warning) = classify_file(entry.path(), &rel);
        if size > MAX_SCAN_BYTES {
            notes.oversized.push(rel.clone());
        }
        entries.push(InventoryEntry { path: rel, kind, size, warning });
    }
    // Submodules are directories with their own VCS metadata; drop their
    // contents and remember the mount point.
    let submodules = find_submodules(root);
    if !submodules.is_empty() {
        entries.retain(|e| !submodules.iter().any(|s| e.path.starts_with(&format!("{s}/"))));
        notes.submodules_skipped = submodules;
    }
    Ok(FileInventory::from_entries(entries, notes))
}

fn find_submodules(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let walker = WalkDir::new(root).follow_links(false).sort_by_file_name().into_iter().filter_entry(|e| {
        !(e.depth() > 0 && e.file_type().is_dir() && VCS_DIRS.contains(&e.file_name().to_string_lossy().as_ref()))
    });
    for e in walker.flatten() {
        if e.depth() > 0 && e.file_type().is_dir() && e.path().join(".git").exists() {
            out.push(rel_string(e.path().strip_prefix(root).unwrap_or(e.path())));
        }
    }
    out.sort();
    // nested paths are already covered by their parent
    let mut kept: Vec<String> = Vec::new();
    for s in out {
        if !kept.iter().any(|k| s.starts_with(&format!("{k}/"))) {
            kept.push(s);
        }
    }
    kept
}

fn rel_string(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn classify_file(abs: &Path, rel: &str) -> (FileKind, Option<String>) {
    let needs_sniff = extension(file_name(rel)).is_none();
    if !needs_sniff {
        return (classify_path(rel, None), None);
    }
    match read_head(abs) {
        Ok(head) => (classify_path(rel, Some(&head)), None),
        Err(e) => (FileKind::Other, Some(format!("unreadable: {e}"))),
    }
}

fn read_head(p: &Path) -> std::io::Result<Vec<u8>> {
    let mut f = fs::File::open(p)?;
    let mut buf = vec![0u8; 256];
    let n = f.read(&mut buf)?;
    buf.truncate(n);
    Ok(buf)
}

fn file_name(rel: &str) -> &str {
    rel.rsplit('/').next().unwrap_or(rel)
}

fn extension(name: &str) -> Option<&str> {
    let idx = name.rfind('.')?;
    if idx == 0 {
        return None;
    }
    Some(&name[idx + 1..])
}

const DATA_EXTENSIONS: &[&str] = &[
    "csv", "tsv", "parquet", "feather", "arrow", "h5", "hdf5", "hdf", "he5", "npy", "npz", "pkl", "pickle", "xlsx",
    "xls", "nc", "mat", "fasta", "fa", "fna", "faa", "fastq", "fq", "bam", "sam", "cram", "vcf", "bed", "gff", "gff3",
    "gtf", "sav", "dta", "rds", "rdata", "sqlite", "db", "jsonl", "ndjson", "tfrecord", "zarr", "mtx", "loom", "h5ad",
    "xml", "dat",
];

const CONFIG_EXTENSIONS: &[&str] = &["yml", "yaml", "json", "toml", "ini", "cfg", "conf", "config", "properties", "env"];

const WORKFLOW_NAMES: &[&str] = &["snakefile", "nextflow.config", ".python-version", "runtime.txt", ".tool-versions"];
const WORKFLOW_EXTENSIONS: &[&str] = &["smk", "nf", "cwl", "wdl"];

/// Classifies a relative path. `head` holds the first bytes of the file when
/// the caller sniffed it.
pub fn classify_path(rel: &str, head: Option<&[u8]>) -> FileKind {
    let name = file_name(rel);
    let lower = name.to_ascii_lowercase();
    let ext = extension(&lower).map(str::to_string);
    let ext = ext.as_deref();
    let dirs: Vec<String> = rel.split('/').rev().skip(1).map(|d| d.to_ascii_lowercase()).collect();
    let doc_ext = matches!(ext, None | Some("md" | "txt" | "rst" | "markdown" | "org" | "adoc"));

    if doc_ext && ["license", "licence", "copying", "unlicense"].iter().any(|p| lower.starts_with(p)) {
        return FileKind::License;
    }
    if lower.starts_with("citation") && matches!(ext, None | Some("cff" | "bib" | "md" | "txt" | "rst")) {
        return FileKind::Citation;
    }
    if lower == "codemeta.json" {
        return FileKind::Codemeta;
    }
    if lower.starts_with("readme") && doc_ext {
        return FileKind::Readme;
    }
    if is_lockfile(&lower) {
        return FileKind::Lockfile;
    }
    if is_manifest(&lower, ext, &dirs) {
        return FileKind::DependencyManifest;
    }
    if is_container_spec(&lower, ext) {
        return FileKind::ContainerSpec;
    }
    if is_ci_config(rel, &lower, ext) {
        return FileKind::CiConfig;
    }
    if matches!(lower.as_str(), "makefile" | "gnumakefile") || ext == Some("mk") {
        return FileKind::Makefile;
    }
    if ext == Some("ipynb") {
        return FileKind::Notebook;
    }
    let shebang = head.and_then(shebang_interpreter);
    let is_python = matches!(ext, Some("py" | "pyw")) || (ext.is_none() && shebang.as_deref() == Some("python"));
    if is_python {
        let stem = lower.trim_end_matches(".pyw").trim_end_matches(".py");
        if stem.starts_with("test_") || stem.ends_with("_test") || dirs.iter().any(|d| d == "tests" || d == "test") {
            return FileKind::TestFile;
        }
        return FileKind::PythonSource;
    }
    if matches!(ext, Some("sh" | "bash" | "zsh")) || (ext.is_none() && shebang.as_deref() == Some("shell")) {
        return FileKind::ShellScript;
    }
    if WORKFLOW_NAMES.contains(&lower.as_str())
        || ext.is_some_and(|e| WORKFLOW_EXTENSIONS.contains(&e) || CONFIG_EXTENSIONS.contains(&e))
    {
        return FileKind::ConfigFile;
    }
    if ext.is_some_and(|e| DATA_EXTENSIONS.contains(&e)) {
        return FileKind::DataFile;
    }
    FileKind::Other
}

fn is_lockfile(lower: &str) -> bool {
    matches!(
        lower,
        "poetry.lock" | "pipfile.lock" | "pdm.lock" | "uv.lock" | "conda-lock.yml" | "conda-lock.yaml" | "renv.lock"
    ) || lower.ends_with(".conda-lock.yml")
        || lower.ends_with(".conda-lock.yaml")
        || (lower.starts_with("conda-") && lower.ends_with(".lock"))
}

fn is_manifest(lower: &str, ext: Option<&str>, dirs: &[String]) -> bool {
    if lower.starts_with("requirements") && matches!(ext, Some("txt" | "in" | "pip")) {
        return true;
    }
    if dirs.first().is_some_and(|d| d == "requirements") && ext == Some("txt") {
        return true;
    }
    if lower.starts_with("environment") && matches!(ext, Some("yml" | "yaml")) {
        return true;
    }
    matches!(lower, "pyproject.toml" | "setup.py" | "setup.cfg" | "pipfile")
}

fn is_container_spec(lower: &str, ext: Option<&str>) -> bool {
    lower.starts_with("dockerfile")
        || lower.ends_with(".dockerfile")
        || lower == "containerfile"
        || lower == "singularity"
        || lower.starts_with("singularity.")
        || ext == Some("def")
        || lower == "devcontainer.json"
        || lower == ".devcontainer.json"
}

fn is_ci_config(rel: &str, lower: &str, ext: Option<&str>) -> bool {
    let rel_lower = rel.to_ascii_lowercase();
    (rel_lower.starts_with(".github/workflows/") && matches!(ext, Some("yml" | "yaml")))
        || rel_lower == ".circleci/config.yml"
        || matches!(
            lower,
            ".gitlab-ci.yml"
                | ".travis.yml"
                | "azure-pipelines.yml"
                | "jenkinsfile"
                | "bitbucket-pipelines.yml"
                | ".drone.yml"
                | "appveyor.yml"
        )
}

fn shebang_interpreter(head: &[u8]) -> Option<String> {
    let text = String::from_utf8_lossy(head);
    let first = text.lines().next()?;
    let rest = first.strip_prefix("#!")?;
    if rest.contains("python") {
        Some("python".into())
    } else if ["bash", "/sh", " sh", "zsh"].iter().any(|s| rest.contains(s)) {
        Some("shell".into())
    } else {
        None
    }
}

/// Absolute path for an inventory entry.
pub fn absolute(root: &Path, rel: &str) -> PathBuf {
    rel.split('/').fold(root.to_path_buf(), |p, c| p.join(c))
}
