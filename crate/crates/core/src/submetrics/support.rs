//! Helpers shared by the analyzers.

use std::sync::OnceLock;

use regex::Regex;

use super::AnalysisContext;
use crate::repo::python::scan_lines;
use crate::repo::{CodeUnit, FileKind, ReadmeModel};

pub fn file_name(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

pub fn lower_name(path: &str) -> String {
    file_name(path).to_ascii_lowercase()
}

/// Lowercase file name without its last extension.
pub fn lower_stem(path: &str) -> String {
    let n = lower_name(path);
    match n.rfind('.') {
        Some(i) if i > 0 => n[..i].to_string(),
        _ => n,
    }
}

pub fn lower_ext(path: &str) -> Option<String> {
    let n = lower_name(path);
    n.rfind('.').filter(|&i| i > 0).map(|i| n[i + 1..].to_string())
}

/// Lowercase directory components of a relative path.
pub fn dirs(path: &str) -> Vec<String> {
    let mut parts: Vec<String> = path.split('/').map(str::to_ascii_lowercase).collect();
    parts.pop();
    parts
}

pub fn is_doc_path(path: &str) -> bool {
    matches!(lower_ext(path).as_deref(), Some("md" | "markdown" | "rst" | "txt" | "adoc" | "org"))
}

/// README files plus other prose documents (Markdown, reStructuredText, text).
pub fn doc_texts<'a>(ctx: &'a AnalysisContext<'_>) -> Vec<(&'a str, &'a str)> {
    let inv = ctx.snapshot.inventory();
    inv.entries()
        .iter()
        .filter(|e| e.kind == FileKind::Readme || (e.kind == FileKind::Other && is_doc_path(&e.path)))
        .filter_map(|e| ctx.models.texts.get_key_value(&e.path))
        .map(|(p, t)| (p.as_str(), t.as_str()))
        .collect()
}

/// READMEs at the repository root.
pub fn root_readmes<'a>(ctx: &'a AnalysisContext<'_>) -> impl Iterator<Item = &'a ReadmeModel> {
    ctx.models.readmes.iter().filter(|r| !r.path.contains('/'))
}

/// Texts of files of the given kinds.
pub fn texts_of<'a>(ctx: &'a AnalysisContext<'_>, kinds: &[FileKind]) -> Vec<(&'a str, &'a str)> {
    ctx.snapshot
        .inventory()
        .entries()
        .iter()
        .filter(|e| kinds.contains(&e.kind))
        .filter_map(|e| ctx.models.texts.get_key_value(&e.path))
        .map(|(p, t)| (p.as_str(), t.as_str()))
        .collect()
}

/// Comment-free statement lines of a code unit, plus notebook shell
/// escapes. Malformed notebooks contribute their raw lines.
pub fn code_lines(unit: &CodeUnit) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = if unit.parse_error.is_some() {
        unit.python.lines().enumerate().map(|(i, l)| (i + 1, l.to_string())).collect()
    } else {
        scan_lines(&unit.python).into_iter().filter(|l| l.is_code()).map(|l| (l.number, l.code)).collect()
    };
    out.extend(unit.shell.iter().map(|s| (0, s.clone())));
    out
}

/// Non-comment lines of a shell-like file.
pub fn shell_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Removes shell prompts such as `$ ` or `> ` from a code-block line.
pub fn strip_prompt(line: &str) -> &str {
    let t = line.trim();
    for p in ["$ ", "> ", "% ", ">>> ", "(base) $ "] {
        if let Some(rest) = t.strip_prefix(p) {
            return rest.trim_start();
        }
    }
    t
}

pub fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)\b(?:https?|ftp|s3|gs)://[^\s)\]>"'`,;]+"#).unwrap())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MakeTarget {
    pub name: String,
    pub line: usize,
    pub recipe: Vec<String>,
}

fn target_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([A-Za-z0-9_./%-]+(?:\s+[A-Za-z0-9_./%-]+)*)\s*::?(?:[^=]|$)").unwrap())
}

/// Rule targets of a Makefile with their recipe lines.
pub fn make_targets(text: &str) -> Vec<MakeTarget> {
    let mut out: Vec<MakeTarget> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('\t') {
            let cmd = line.trim().trim_start_matches(['@', '-']).to_string();
            for &t in &current {
                out[t].recipe.push(cmd.clone());
            }
            continue;
        }
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        current.clear();
        if let Some(c) = target_re().captures(line) {
            for name in c[1].split_whitespace() {
                if name.starts_with('.') {
                    continue;
                }
                current.push(out.len());
                out.push(MakeTarget { name: name.to_string(), line: i + 1, recipe: Vec::new() });
            }
        }
    }
    out
}

/// Whether `text` contains `word` starting at a word boundary.
pub fn has_word_prefix(text: &str, word: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let mut from = 0;
    while let Some(i) = lower[from..].find(word) {
        let at = from + i;
        if at == 0 || !bytes[at - 1].is_ascii_alphanumeric() {
            return true;
        }
        from = at + 1;
    }
    false
}
