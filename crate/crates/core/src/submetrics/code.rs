//! C: code portability.
//!
//! The file-fraction metrics scan Python sources, test files and notebooks.
//! With no such file they do not apply.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use super::support::{code_lines, dirs, lower_ext, lower_stem};
use super::{AnalysisContext, Evidence, SubMetricId, SubMetricResult};
use crate::repo::deps::normalize_name;
use crate::repo::python::{imports, silent_failures};
use crate::repo::{CodeUnit, FileKind};

fn abs_path_patterns() -> &'static [(Regex, &'static str)] {
    static RE: OnceLock<Vec<(Regex, &'static str)>> = OnceLock::new();
    RE.get_or_init(|| {
        vec![
            (Regex::new(r#"["'](?:/mnt/[A-Za-z])?/(?:home|Users)/[^/"'\s]+"#).unwrap(), "home directory path"),
            (Regex::new(r#"["'][A-Za-z]:(?:\\\\|\\|/)"#).unwrap(), "drive-letter path"),
            (Regex::new(r"(?:^|\s)(?:/mnt/[A-Za-z])?/(?:home|Users)/[^/\s]+").unwrap(), "home directory path"),
        ]
    })
}

fn fraction_clean(
    id: SubMetricId,
    units: &[&CodeUnit],
    flagged: impl Fn(&CodeUnit) -> Vec<Evidence>,
    clean_note: &str,
    skipped: Vec<Evidence>,
) -> SubMetricResult {
    let mut ev = skipped;
    if units.is_empty() {
        ev.push(Evidence::repo("no source files scanned"));
        return SubMetricResult::new(id, None, ev);
    }
    let mut clean = 0usize;
    for u in units {
        let hits = flagged(u);
        if hits.is_empty() {
            clean += 1;
            ev.push(Evidence::file(&u.path, clean_note));
        } else {
            ev.extend(hits);
        }
    }
    SubMetricResult::new(id, Some(100.0 * clean as f64 / units.len() as f64), ev)
}

pub fn no_absolute_paths(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let units: Vec<&CodeUnit> = ctx.models.code_units.iter().collect();
    fraction_clean(
        SubMetricId::NoAbsolutePaths,
        &units,
        |u| {
            let mut hits = Vec::new();
            for (n, line) in code_lines(u) {
                for (re, note) in abs_path_patterns() {
                    if let Some(m) = re.find(&line) {
                        hits.push(Evidence::matched(&u.path, (n > 0).then_some(n), m.as_str().trim(), *note));
                        break;
                    }
                }
            }
            hits
        },
        "no machine-specific paths",
        Vec::new(),
    )
}

fn creds_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r#"(?i)\b(\w*(?:api_?key|apikey|secret|secret_?key|token|passw(?:or)?d|pwd|access_?key|private_?key|auth_?key))["']?\s*[:=]\s*[rbuf]?["']([^"']{4,})["']"#,
        )
        .unwrap()
    })
}

fn placeholder_value(v: &str) -> bool {
    let l = v.to_ascii_lowercase();
    ["your", "<", "[", "${", "{", "xxx", "changeme", "***", "none", "null", "todo", "example", "dummy", "placeholder", "insert", "enter"]
        .iter()
        .any(|p| l.starts_with(p) || l.contains("your_") || l.contains("your-"))
}

pub fn no_hardcoded_creds(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let units: Vec<&CodeUnit> = ctx.models.code_units.iter().collect();
    fraction_clean(
        SubMetricId::NoHardcodedCreds,
        &units,
        |u| {
            code_lines(u)
                .into_iter()
                .filter_map(|(n, line)| {
                    let c = creds_re().captures(&line)?;
                    (!placeholder_value(&c[2])).then(|| {
                        Evidence::matched(&u.path, (n > 0).then_some(n), c[1].to_string(), "credential assigned a string literal")
                    })
                })
                .collect()
        },
        "no credential literals",
        Vec::new(),
    )
}

pub fn no_silent_failures(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let skipped: Vec<Evidence> = ctx
        .models
        .code_units
        .iter()
        .filter(|u| u.parse_error.is_some())
        .map(|u| Evidence::file(&u.path, "malformed notebook not scanned"))
        .collect();
    let units: Vec<&CodeUnit> = ctx.models.code_units.iter().filter(|u| u.parse_error.is_none()).collect();
    fraction_clean(
        SubMetricId::NoSilentFailures,
        &units,
        |u| {
            silent_failures(&u.python)
                .into_iter()
                .map(|n| Evidence::matched(&u.path, Some(n), "except: pass", "exception swallowed"))
                .collect()
        },
        "no swallowed exceptions",
        skipped,
    )
}

/// Top-level module names provided by the repository itself.
pub fn local_modules(ctx: &AnalysisContext<'_>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in ctx.snapshot.inventory().entries() {
        let python = matches!(e.kind, FileKind::PythonSource | FileKind::TestFile) || lower_ext(&e.path).as_deref() == Some("py");
        let notebook = e.kind == FileKind::Notebook;
        if !python && !notebook {
            continue;
        }
        if python {
            out.insert(lower_stem(&e.path));
        }
        out.extend(dirs(&e.path));
    }
    out
}

pub fn import_resolvability(ctx: &AnalysisContext<'_>) -> SubMetricResult {
    let units: Vec<&CodeUnit> = ctx.models.code_units.iter().filter(|u| u.parse_error.is_none()).collect();
    if units.is_empty() {
        return SubMetricResult::new(SubMetricId::ImportResolvability, None, vec![Evidence::repo("no source files scanned")]);
    }
    let local = local_modules(ctx);
    let p = ctx.patterns;
    // top-level module → (full module paths, first occurrence)
    let mut third: BTreeMap<String, (BTreeSet<String>, String, usize)> = BTreeMap::new();
    for u in &units {
        for imp in imports(&u.python) {
            let top = imp.top_level().to_string();
            if top == "__future__" || p.is_stdlib(&top) || local.contains(&top.to_ascii_lowercase()) {
                continue;
            }
            let e = third.entry(top).or_insert_with(|| (BTreeSet::new(), u.path.clone(), imp.line));
            e.0.insert(imp.module.clone());
        }
    }
    let deps = &ctx.models.deps;
    if third.is_empty() {
        let ev = units.iter().map(|u| Evidence::file(&u.path, "no third-party imports")).collect();
        return SubMetricResult::new(SubMetricId::ImportResolvability, Some(100.0), ev);
    }
    let mut ev = Vec::new();
    if deps.declared.is_empty() {
        ev.extend(third.iter().map(|(m, (_, path, line))| Evidence::matched(path, Some(*line), m.clone(), "import with no dependency declaration")));
        ev.push(Evidence::repo("no dependency specification"));
        return SubMetricResult::new(SubMetricId::ImportResolvability, Some(0.0), ev);
    }
    let mut resolved = 0usize;
    for (top, (modules, path, line)) in &third {
        let norm_top = normalize_name(top);
        let hit = modules.iter().flat_map(|m| p.distributions_for(m)).any(|d| deps.declared.contains_key(&d))
            || deps.declared.keys().any(|d| d.starts_with(&format!("{norm_top}-")));
        if hit {
            resolved += 1;
            ev.push(Evidence::matched(path, Some(*line), top.clone(), "import declared"));
        } else {
            ev.push(Evidence::matched(path, Some(*line), top.clone(), "import not declared"));
        }
    }
    let score = 100.0 * resolved as f64 / third.len() as f64;
    SubMetricResult::new(SubMetricId::ImportResolvability, Some(score), ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_path_regexes() {
        let m = |s: &str| abs_path_patterns().iter().any(|(r, _)| r.is_match(s));
        assert!(m("df = pd.read_csv('/home/alice/data.csv')"));
        assert!(m("p = \"/Users/bob/x\""));
        assert!(m("p = r'C:\\data\\x.csv'"));
        assert!(m("p = 'D:/data'"));
        assert!(!m("u = 'https://example.com/home/index'"));
        assert!(!m("p = 'data/home/x'"));
        assert!(!m("p = os.path.expanduser('~/data')"));
    }

    #[test]
    fn credential_regex() {
        let flagged = |s: &str| creds_re().captures(s).is_some_and(|c| !placeholder_value(&c[2]));
        assert!(flagged("API_KEY = 'sk-1234567890'"));
        assert!(flagged("config = {\"password\": \"hunter22\"}"));
        assert!(flagged("hf_token=\"abcdefgh\""));
        assert!(!flagged("tokenizer = 'bert-base-uncased'"));
        assert!(!flagged("api_key = os.environ['API_KEY']"));
        assert!(!flagged("API_KEY = 'YOUR_API_KEY'"));
        assert!(!flagged("pad_token = '[PAD]'"));
    }
}
