//! Notebook documents (nbformat 4, with a fallback for the v3 worksheet layout).

use std::fs;
use std::path::Path;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Code,
    Markdown,
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    pub source: String,
    /// Absent for never-executed code cells and for non-code cells.
    pub execution_count: Option<i64>,
    pub outputs: Vec<Value>,
}

impl Cell {
    pub fn is_blank(&self) -> bool {
        self.source.trim().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotebookModel {
    pub path: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: malformed notebook: {reason}")]
pub struct NotebookError {
    pub path: String,
    pub reason: String,
}

impl NotebookModel {
    pub fn parse_file(root: &Path, rel: &str) -> Result<Self, NotebookError> {
        let abs = super::inventory::absolute(root, rel);
        let bytes = fs::read(&abs).map_err(|e| NotebookError { path: rel.to_string(), reason: e.to_string() })?;
        Self::parse_bytes(rel, &bytes)
    }

    pub fn parse_str(path: &str, text: &str) -> Result<Self, NotebookError> {
        Self::parse_bytes(path, text.as_bytes())
    }

    pub fn parse_bytes(path: &str, bytes: &[u8]) -> Result<Self, NotebookError> {
        let err = |reason: String| NotebookError { path: path.to_string(), reason };
        let doc: Value = serde_json::from_slice(bytes).map_err(|e| err(e.to_string()))?;
        let obj = doc.as_object().ok_or_else(|| err("top level is not an object".into()))?;

        let raw_cells: Vec<&Value> = if let Some(cells) = obj.get("cells") {
            cells.as_array().ok_or_else(|| err("`cells` is not an array".into()))?.iter().collect()
        } else if let Some(ws) = obj.get("worksheets").and_then(Value::as_array) {
            ws.iter()
                .filter_map(|w| w.get("cells").and_then(Value::as_array))
                .flatten()
                .collect()
        } else {
            Vec::new()
        };

        let mut cells = Vec::with_capacity(raw_cells.len());
        for (i, c) in raw_cells.into_iter().enumerate() {
            let c = c.as_object().ok_or_else(|| err(format!("cell {i} is not an object")))?;
            let kind = match c.get("cell_type").and_then(Value::as_str) {
                Some("code") => CellKind::Code,
                Some("markdown") | Some("heading") => CellKind::Markdown,
                _ => CellKind::Raw,
            };
            let source = c.get("source").or_else(|| c.get("input")).map(join_source).unwrap_or_default();
            let execution_count = if kind == CellKind::Code {
                c.get("execution_count").or_else(|| c.get("prompt_number")).and_then(Value::as_i64)
            } else {
                None
            };
            let outputs = match c.get("outputs") {
                Some(Value::Array(a)) if kind == CellKind::Code => a.clone(),
                _ => Vec::new(),
            };
            cells.push(Cell { kind, source, execution_count, outputs });
        }
        Ok(NotebookModel { path: path.to_string(), cells })
    }

    pub fn code_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.kind == CellKind::Code)
    }

    /// Execution counts of the executed code cells, in cell order.
    pub fn execution_counts(&self) -> Vec<i64> {
        self.code_cells().filter_map(|c| c.execution_count).collect()
    }

    /// Source of all code cells joined by newlines, with IPython magics and
    /// shell escapes (`%`, `!`) removed.
    pub fn python_source(&self) -> String {
        let mut out = String::new();
        for c in self.code_cells() {
            for line in c.source.lines() {
                let t = line.trim_start();
                if t.starts_with('%') || t.starts_with('!') {
                    out.push('\n');
                } else {
                    out.push_str(line);
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Shell escape lines (`!cmd`) from code cells, without the bang.
    pub fn shell_lines(&self) -> Vec<String> {
        self.code_cells()
            .flat_map(|c| c.source.lines())
            .filter_map(|l| l.trim_start().strip_prefix('!').map(str::to_string))
            .collect()
    }

    pub fn markdown_text(&self) -> String {
        self.cells
            .iter()
            .filter(|c| c.kind == CellKind::Markdown)
            .map(|c| c.source.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn join_source(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(parts) => parts.iter().filter_map(Value::as_str).collect(),
        _ => String::new(),
    }
}

/// True when the present execution counts are strictly increasing in cell order.
pub fn is_strictly_increasing(counts: &[i64]) -> bool {
    counts.windows(2).all(|w| w[0] < w[1])
}

#[cfg(test)]
pub(crate) fn notebook_json(cells: &[(&str, &str, Option<i64>)]) -> String {
    let cells: Vec<Value> = cells
        .iter()
        .map(|(kind, src, count)| {
            let mut c = serde_json::json!({"cell_type": kind, "metadata": {}, "source": src});
            if *kind == "code" {
                c["execution_count"] = count.map_or(Value::Null, Value::from);
                c["outputs"] = Value::Array(vec![]);
            }
            c
        })
        .collect();
    serde_json::json!({"cells": cells, "metadata": {}, "nbformat": 4, "nbformat_minor": 5}).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_preserved_in_order() {
        let nb = NotebookModel::parse_str(
            "a.ipynb",
            &notebook_json(&[("code", "x=1", Some(2)), ("markdown", "# t", None), ("code", "y", Some(1)), ("code", "z", Some(3))]),
        )
        .unwrap();
        assert_eq!(nb.execution_counts(), vec![2, 1, 3]);
        assert_eq!(nb.cells[1].kind, CellKind::Markdown);
        assert_eq!(nb.cells[1].execution_count, None);
        assert!(!is_strictly_increasing(&nb.execution_counts()));
        assert!(is_strictly_increasing(&[1, 2, 5]));
    }

    #[test]
    fn never_executed_cells_have_no_count() {
        let nb = NotebookModel::parse_str("a.ipynb", &notebook_json(&[("code", "x", None)])).unwrap();
        assert!(nb.execution_counts().is_empty());
    }

    #[test]
    fn truncated_json_is_an_error_with_path() {
        let e = NotebookModel::parse_str("nb/broken.ipynb", r#"{"cells": [{"cell_type": "code""#).unwrap_err();
        assert_eq!(e.path, "nb/broken.ipynb");
    }

    #[test]
    fn missing_optional_keys_use_defaults() {
        let nb = NotebookModel::parse_str("a.ipynb", r#"{"cells": [{"cell_type": "code", "source": ["a\n", "b"]}]}"#).unwrap();
        assert_eq!(nb.cells[0].source, "a\nb");
        assert_eq!(nb.cells[0].execution_count, None);
        assert!(nb.cells[0].outputs.is_empty());
        let empty = NotebookModel::parse_str("b.ipynb", r#"{"metadata": {}}"#).unwrap();
        assert!(empty.cells.is_empty());
    }

    #[test]
    fn v3_worksheets_supported() {
        let doc = r#"{"worksheets": [{"cells": [{"cell_type": "code", "input": "x", "prompt_number": 4, "outputs": []}]}]}"#;
        let nb = NotebookModel::parse_str("old.ipynb", doc).unwrap();
        assert_eq!(nb.execution_counts(), vec![4]);
        assert_eq!(nb.cells[0].source, "x");
    }

    #[test]
    fn magics_stripped_from_python_source() {
        let nb = NotebookModel::parse_str("a.ipynb", &notebook_json(&[("code", "%matplotlib inline\n!pip install x\nimport os", Some(1))])).unwrap();
        assert_eq!(nb.python_source(), "\n\nimport os\n");
        assert_eq!(nb.shell_lines(), vec!["pip install x"]);
    }
}
