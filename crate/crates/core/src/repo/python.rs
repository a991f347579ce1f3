//! Line-level Python source scanning: comments, strings, imports,
//! definitions and exception handlers. No full parser; good enough for
//! heuristics and deterministic.

use std::sync::OnceLock;

use regex::Regex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLine {
    /// 1-based line number.
    pub number: usize,
    /// The line with any trailing comment removed. String literals are kept.
    pub code: String,
    pub has_comment: bool,
    /// The line starts inside a triple-quoted string.
    pub starts_in_string: bool,
}

impl SourceLine {
    pub fn is_blank(&self) -> bool {
        self.code.trim().is_empty() && !self.has_comment
    }

    /// A statement line: non-empty code that does not begin inside a string.
    pub fn is_code(&self) -> bool {
        !self.starts_in_string && !self.code.trim().is_empty()
    }

    pub fn indent(&self) -> usize {
        self.code.len() - self.code.trim_start().len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quote {
    Single(u8),
    Triple(u8),
}

/// Splits source into lines, tracking string and comment state across lines.
pub fn scan_lines(source: &str) -> Vec<SourceLine> {
    let mut out = Vec::new();
    let mut open: Option<Quote> = None;
    for (i, line) in source.lines().enumerate() {
        let starts_in_string = matches!(open, Some(Quote::Triple(_)));
        let bytes = line.as_bytes();
        let mut code_end = bytes.len();
        let mut has_comment = false;
        let mut j = 0;
        while j < bytes.len() {
            let b = bytes[j];
            match open {
                Some(q) => {
                    if b == b'\\' {
                        j += 2;
                        continue;
                    }
                    match q {
                        Quote::Single(c) if b == c => open = None,
                        Quote::Triple(c) if b == c && bytes[j..].starts_with(&[c, c, c]) => {
                            open = None;
                            j += 3;
                            continue;
                        }
                        _ => {}
                    }
                }
                None => {
                    if b == b'#' {
                        has_comment = true;
                        code_end = j;
                        break;
                    }
                    if b == b'"' || b == b'\'' {
                        if bytes[j..].starts_with(&[b, b, b]) {
                            open = Some(Quote::Triple(b));
                            j += 3;
                            continue;
                        }
                        open = Some(Quote::Single(b));
                    }
                }
            }
            j += 1;
        }
        // Unterminated single-quoted strings end at the line break.
        if matches!(open, Some(Quote::Single(_))) {
            open = None;
        }
        out.push(SourceLine {
            number: i + 1,
            code: line[..code_end].trim_end().to_string(),
            has_comment,
            starts_in_string,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub line: usize,
    /// Full dotted module path, e.g. `sklearn.linear_model`.
    pub module: String,
}

impl Import {
    pub fn top_level(&self) -> &str {
        self.module.split('.').next().unwrap_or(&self.module)
    }
}

fn import_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*import\s+(.+)$").unwrap())
}

fn from_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*from\s+([A-Za-z_][\w.]*)\s+import\b").unwrap())
}

fn module_path_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][\w]*(\.[A-Za-z_]\w*)*$").unwrap())
}

/// Absolute imports in source order. Relative imports (`from . import x`)
/// are skipped.
pub fn imports(source: &str) -> Vec<Import> {
    let mut out = Vec::new();
    for l in scan_lines(source).iter().filter(|l| l.is_code()) {
        for stmt in l.code.split(';') {
            if let Some(c) = from_re().captures(stmt) {
                out.push(Import { line: l.number, module: c[1].to_string() });
            } else if let Some(c) = import_re().captures(stmt) {
                for part in c[1].split(',') {
                    let m = part.trim().trim_start_matches('(').split_whitespace().next().unwrap_or("");
                    let m = m.trim_end_matches([')', '\\']);
                    if module_path_re().is_match(m) {
                        out.push(Import { line: l.number, module: m.to_string() });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefinitionKind {
    Function,
    Class,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub line: usize,
    pub name: String,
    pub kind: DefinitionKind,
    pub documented: bool,
}

impl Definition {
    pub fn is_public(&self) -> bool {
        !self.name.starts_with('_')
    }
}

fn def_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:async\s+)?(def|class)\s+([A-Za-z_]\w*)").unwrap())
}

fn docstring_start_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"^\s*[rRuUbB]{0,2}("|')"#).unwrap())
}

fn paren_depth(code: &str) -> i64 {
    // String contents may hold brackets; strip simple literals first.
    let mut depth = 0i64;
    let mut quote: Option<char> = None;
    for c in code.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None => match c {
                '"' | '\'' => quote = Some(c),
                '(' | '[' | '{' => depth += 1,
                ')' | ']' | '}' => depth -= 1,
                _ => {}
            },
        }
    }
    depth
}

/// Function and class definitions with docstring presence.
pub fn definitions(source: &str) -> Vec<Definition> {
    let lines = scan_lines(source);
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let l = &lines[i];
        let Some(c) = l.is_code().then(|| def_re().captures(&l.code)).flatten() else {
            i += 1;
            continue;
        };
        let kind = if &c[1] == "def" { DefinitionKind::Function } else { DefinitionKind::Class };
        let name = c[2].to_string();
        // Find the end of the header: the line where brackets balance and the
        // code ends with a colon, or a one-liner body follows the colon.
        let mut depth = 0;
        let mut j = i;
        let mut inline_body = false;
        while j < lines.len() {
            depth += paren_depth(&lines[j].code);
            let code = lines[j].code.trim_end();
            if depth <= 0 {
                if !code.ends_with(':') {
                    inline_body = code.contains(':');
                }
                break;
            }
            j += 1;
        }
        let documented = if inline_body {
            false
        } else {
            lines
                .get(j + 1..)
                .unwrap_or(&[])
                .iter()
                .find(|n| !n.code.trim().is_empty())
                .is_some_and(|n| !n.starts_in_string && docstring_start_re().is_match(&n.code))
        };
        out.push(Definition { line: l.number, name, kind, documented });
        i += 1;
    }
    out
}

/// Counts of (comment-bearing lines, non-blank lines). A leading shebang or
/// encoding declaration is ignored.
pub fn comment_density_counts(source: &str) -> (usize, usize) {
    let mut comments = 0;
    let mut nonblank = 0;
    for l in scan_lines(source) {
        if l.number <= 2 && l.code.trim().is_empty() && l.has_comment {
            let raw = source.lines().nth(l.number - 1).unwrap_or("").trim();
            if raw.starts_with("#!") || raw.contains("coding") {
                continue;
            }
        }
        if l.is_blank() {
            continue;
        }
        nonblank += 1;
        if l.has_comment && !l.starts_in_string {
            comments += 1;
        }
    }
    (comments, nonblank)
}

fn except_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*except\s*(?:\(?\s*(?:Exception|BaseException)\s*\)?(?:\s+as\s+\w+)?)?\s*:\s*(.*)$").unwrap()
    })
}

/// Lines of catch-all handlers (`except:`, `except Exception:`) whose body
/// is only `pass`.
pub fn silent_failures(source: &str) -> Vec<usize> {
    let lines = scan_lines(source);
    let mut out = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        if !l.is_code() {
            continue;
        }
        let Some(c) = except_re().captures(&l.code) else {
            continue;
        };
        let inline = c[1].trim();
        if !inline.is_empty() {
            if inline == "pass" {
                out.push(l.number);
            }
            continue;
        }
        let indent = l.indent();
        let body: Vec<&SourceLine> = lines[i + 1..]
            .iter()
            .filter(|n| !n.code.trim().is_empty())
            .take_while(|n| n.starts_in_string || n.indent() > indent)
            .collect();
        if !body.is_empty() && body.iter().all(|n| n.code.trim() == "pass") {
            out.push(l.number);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_outside_strings_only() {
        let src = "x = '# not a comment'  # real\ns = \"\"\"\n# inside\n\"\"\"\n# full line\n";
        let lines = scan_lines(src);
        assert!(lines[0].has_comment);
        assert_eq!(lines[0].code, "x = '# not a comment'");
        assert!(!lines[2].has_comment && lines[2].starts_in_string);
        assert!(lines[4].has_comment);
    }

    #[test]
    fn import_forms() {
        let src = "import os, numpy as np\nfrom sklearn.linear_model import X\nfrom . import local\nif x: import scipy.stats\n\"\"\"\nimport fake\n\"\"\"\n# import commented\nimport a; import b\n";
        let mods: Vec<String> = imports(src).into_iter().map(|i| i.module).collect();
        assert_eq!(mods, vec!["os", "numpy", "sklearn.linear_model", "a", "b"]);
    }

    #[test]
    fn definitions_and_docstrings() {
        let src = "def documented(a,\n               b):\n    \"\"\"Doc.\"\"\"\n    return a\n\nclass Thing:\n    pass\n\ndef _private():\n    '''x'''\n\nasync def fetch(): return 1\n\ndef raw():\n    r\"\"\"Raw doc.\"\"\"\n";
        let defs = definitions(src);
        let summary: Vec<(&str, bool)> = defs.iter().map(|d| (d.name.as_str(), d.documented)).collect();
        assert_eq!(summary, vec![("documented", true), ("Thing", false), ("_private", true), ("fetch", false), ("raw", true)]);
        assert!(!defs[2].is_public());
    }

    #[test]
    fn comment_density() {
        let src = "#!/usr/bin/env python\n# one\nx = 1  # two\ny = 2\n\nz = 3\n";
        assert_eq!(comment_density_counts(src), (2, 4));
    }

    #[test]
    fn silent_handlers() {
        let src = "try:\n    f()\nexcept:\n    pass\ntry:\n    g()\nexcept Exception as e:\n    log(e)\ntry:\n    h()\nexcept ValueError:\n    pass\ntry:\n    k()\nexcept Exception: pass\n";
        assert_eq!(silent_failures(src), vec![3, 15]);
    }
}
