//! Versioned pattern, alias and standard-library lists used by the analyzers.
//!
//! The bundled lists live in `data/` and can be replaced file by file from a
//! directory holding files of the same names.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use regex::Regex;

use crate::repo::deps::normalize_name;

/// Bumped whenever a bundled list changes.
pub const PATTERNS_VERSION: u32 = 1;

pub const STDLIB_FILE: &str = "stdlib_python3.txt";
pub const ALIASES_FILE: &str = "import_aliases.txt";
pub const RANDOMNESS_FILE: &str = "randomness_patterns.txt";
pub const SEED_FILE: &str = "seed_patterns.txt";
pub const GPU_FILE: &str = "gpu_packages.txt";
pub const ARCHIVAL_FILE: &str = "archival_hosts.txt";
pub const PLATFORM_FILE: &str = "platform_hosts.txt";
pub const DOWNLOAD_FILE: &str = "download_patterns.txt";

const BUNDLED: [(&str, &str); 8] = [
    (STDLIB_FILE, include_str!("../data/stdlib_python3.txt")),
    (ALIASES_FILE, include_str!("../data/import_aliases.txt")),
    (RANDOMNESS_FILE, include_str!("../data/randomness_patterns.txt")),
    (SEED_FILE, include_str!("../data/seed_patterns.txt")),
    (GPU_FILE, include_str!("../data/gpu_packages.txt")),
    (ARCHIVAL_FILE, include_str!("../data/archival_hosts.txt")),
    (PLATFORM_FILE, include_str!("../data/platform_hosts.txt")),
    (DOWNLOAD_FILE, include_str!("../data/download_patterns.txt")),
];

#[derive(Debug, thiserror::Error)]
pub enum PatternError {
    #[error("{file}: {source}")]
    Io { file: String, source: io::Error },
    #[error("{file}:{line}: invalid pattern: {message}")]
    Regex { file: String, line: usize, message: String },
    #[error("{file}:{line}: expected `<import name> <distribution>`")]
    Alias { file: String, line: usize },
}

/// A host substring. `data_only` hosts count only for links to data
/// files or release assets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostRule {
    pub host: String,
    pub data_only: bool,
}

/// A regex together with its source text, reported as the matched pattern.
#[derive(Debug, Clone)]
pub struct NamedPattern {
    pub source: String,
    pub regex: Regex,
}

#[derive(Debug, Clone)]
pub struct Patterns {
    pub stdlib: BTreeSet<String>,
    /// Import name → candidate distribution names (normalized).
    pub aliases: BTreeMap<String, Vec<String>>,
    pub randomness: Vec<NamedPattern>,
    pub seed: Vec<NamedPattern>,
    /// Normalized distribution or import names.
    pub gpu_packages: BTreeSet<String>,
    pub archival_hosts: Vec<HostRule>,
    pub platform_hosts: Vec<HostRule>,
    pub download: Vec<NamedPattern>,
    /// Files taken from an override directory instead of the bundled copy.
    pub overridden: Vec<String>,
}

impl Default for Patterns {
    fn default() -> Self {
        Self::build(|name| Ok(bundled(name).to_string()), Vec::new()).expect("bundled pattern lists are valid")
    }
}

fn bundled(name: &str) -> &'static str {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).unwrap_or("")
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn regexes(file: &str, text: &str) -> Result<Vec<NamedPattern>, PatternError> {
    lines(text)
        .map(|(line, l)| {
            Regex::new(l)
                .map(|regex| NamedPattern { source: l.to_string(), regex })
                .map_err(|e| PatternError::Regex { file: file.to_string(), line, message: e.to_string() })
        })
        .collect()
}

impl Patterns {
    /// Loads lists from `dir`, falling back to the bundled copy for any file
    /// the directory does not contain.
    pub fn load_dir(dir: &Path) -> Result<Self, PatternError> {
        let mut overridden = Vec::new();
        let mut texts = BTreeMap::new();
        for (name, text) in BUNDLED {
            let p = dir.join(name);
            if p.is_file() {
                let t = fs::read_to_string(&p).map_err(|source| PatternError::Io { file: name.to_string(), source })?;
                overridden.push(name.to_string());
                texts.insert(name, t);
            } else {
                texts.insert(name, text.to_string());
            }
        }
        if !dir.is_dir() {
            return Err(PatternError::Io {
                file: dir.display().to_string(),
                source: io::Error::new(io::ErrorKind::NotFound, "not a directory"),
            });
        }
        Self::build(|name| Ok(texts[name].clone()), overridden)
    }

    fn build(
        read: impl Fn(&str) -> Result<String, PatternError>,
        overridden: Vec<String>,
    ) -> Result<Self, PatternError> {
        let stdlib = lines(&read(STDLIB_FILE)?).map(|(_, l)| l.to_string()).collect();
        let mut aliases: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let alias_text = read(ALIASES_FILE)?;
        for (line, l) in lines(&alias_text) {
            let mut parts = l.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(module), Some(dist), None) => {
                    let d = normalize_name(dist);
                    let e = aliases.entry(module.to_string()).or_default();
                    if !e.contains(&d) {
                        e.push(d);
                    }
                }
                _ => return Err(PatternError::Alias { file: ALIASES_FILE.into(), line }),
            }
        }
        let hosts = |t: String| {
            lines(&t)
                .map(|(_, l)| {
                    let mut parts = l.split_whitespace();
                    let host = parts.next().unwrap_or("").to_ascii_lowercase();
                    HostRule { host, data_only: parts.next() == Some("data-only") }
                })
                .collect::<Vec<_>>()
        };
        Ok(Patterns {
            stdlib,
            aliases,
            randomness: regexes(RANDOMNESS_FILE, &read(RANDOMNESS_FILE)?)?,
            seed: regexes(SEED_FILE, &read(SEED_FILE)?)?,
            gpu_packages: lines(&read(GPU_FILE)?).map(|(_, l)| normalize_name(l)).collect(),
            archival_hosts: hosts(read(ARCHIVAL_FILE)?),
            platform_hosts: hosts(read(PLATFORM_FILE)?),
            download: regexes(DOWNLOAD_FILE, &read(DOWNLOAD_FILE)?)?,
            overridden,
        })
    }

    pub fn is_stdlib(&self, top_level: &str) -> bool {
        self.stdlib.contains(top_level)
    }

    /// Distribution names that may provide `module` (a dotted import path).
    /// Longer dotted aliases win over their prefixes.
    pub fn distributions_for(&self, module: &str) -> Vec<String> {
        let mut candidate = module;
        loop {
            if let Some(d) = self.aliases.get(candidate) {
                let mut out = d.clone();
                out.push(normalize_name(module.split('.').next().unwrap_or(module)));
                return out;
            }
            match candidate.rfind('.') {
                Some(i) => candidate = &candidate[..i],
                None => break,
            }
        }
        vec![normalize_name(module.split('.').next().unwrap_or(module))]
    }

    pub fn is_gpu_package(&self, name: &str) -> bool {
        self.gpu_packages.contains(&normalize_name(name))
    }
}
