//! Output determinism: compares the saved outputs of two runs of the same
//! notebooks.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;

use crate::repo::NotebookModel;
use crate::scalar::Scalar;

/// Absolute tolerance for numeric payloads.
pub const NUMERIC_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeterminismError {
    #[error("notebook sets differ: only in first run {only_a:?}, only in second run {only_b:?}")]
    MismatchedNotebooks { only_a: Vec<String>, only_b: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DeterminismReport<T> {
    pub compared_cells: usize,
    pub matching_cells: usize,
    /// `None` when no output cell could be compared.
    pub delta: Option<T>,
    /// (notebook path, cell index) of differing cells.
    pub differing: Vec<(String, usize)>,
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?(?:nan|inf)\b").unwrap())
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn numbers_close(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= NUMERIC_TOLERANCE
}

/// Text equality where embedded numeric literals may differ by the tolerance.
pub fn text_matches(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    let split = |s: &str| {
        let mut parts = Vec::new();
        let mut nums = Vec::new();
        let mut last = 0;
        for m in number_re().find_iter(s) {
            parts.push(collapse_ws(&s[last..m.start()]));
            nums.push(m.as_str().parse::<f64>().unwrap_or(f64::NAN));
            last = m.end();
        }
        parts.push(collapse_ws(&s[last..]));
        (parts, nums)
    };
    let (pa, na) = split(a);
    let (pb, nb) = split(b);
    pa == pb && na.len() == nb.len() && na.iter().zip(&nb).all(|(x, y)| numbers_close(*x, *y))
}

fn json_matches(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => match (x.as_f64(), y.as_f64()) {
            (Some(x), Some(y)) => numbers_close(x, y),
            _ => x == y,
        },
        (Value::String(x), Value::String(y)) => text_matches(x, y),
        (Value::Array(x), Value::Array(y)) => {
            // multi-line payloads are stored as arrays of strings
            if x.iter().chain(y).all(Value::is_string) {
                let join = |v: &Vec<Value>| v.iter().filter_map(Value::as_str).collect::<String>();
                return text_matches(&join(x), &join(y));
            }
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| json_matches(p, q))
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| json_matches(v, w)))
        }
        _ => a == b,
    }
}

/// The comparable part of one output: type plus payload, without metadata
/// and execution counters.
fn payload(output: &Value) -> Value {
    let kind = output.get("output_type").cloned().unwrap_or(Value::Null);
    let mut p = serde_json::Map::new();
    p.insert("output_type".into(), kind);
    for key in ["name", "text", "data", "ename", "evalue"] {
        if let Some(v) = output.get(key) {
            p.insert(key.into(), v.clone());
        }
    }
    Value::Object(p)
}

fn outputs_match(a: &[Value], b: &[Value]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| json_matches(&payload(x), &payload(y)))
}

/// Δ = 100 × matching output cells / compared output cells. A code cell is
/// compared when either run saved an output for it.
pub fn output_determinism<T: Scalar>(
    run_a: &[NotebookModel],
    run_b: &[NotebookModel],
) -> Result<DeterminismReport<T>, DeterminismError> {
    let a: BTreeMap<&str, &NotebookModel> = run_a.iter().map(|n| (n.path.as_str(), n)).collect();
    let b: BTreeMap<&str, &NotebookModel> = run_b.iter().map(|n| (n.path.as_str(), n)).collect();
    let only_a: Vec<String> = a.keys().filter(|k| !b.contains_key(*k)).map(|k| k.to_string()).collect();
    let only_b: Vec<String> = b.keys().filter(|k| !a.contains_key(*k)).map(|k| k.to_string()).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(DeterminismError::MismatchedNotebooks { only_a, only_b });
    }
    let (mut compared, mut matching) = (0usize, 0usize);
    let mut differing = Vec::new();
    for (path, na) in &a {
        let nb = b[path];
        let ca: Vec<_> = na.code_cells().collect();
        let cb: Vec<_> = nb.code_cells().collect();
        for i in 0..ca.len().max(cb.len()) {
            let oa = ca.get(i).map_or(&[][..], |c| c.outputs.as_slice());
            let ob = cb.get(i).map_or(&[][..], |c| c.outputs.as_slice());
            if oa.is_empty() && ob.is_empty() {
                continue;
            }
            compared += 1;
            if outputs_match(oa, ob) {
                matching += 1;
            } else {
                differing.push((path.to_string(), i));
            }
        }
    }
    let delta = (compared > 0)
        .then(|| T::hundred() * T::from_usize_lossy(matching) / T::from_usize_lossy(compared));
    Ok(DeterminismReport { compared_cells: compared, matching_cells: matching, delta, differing })
}
