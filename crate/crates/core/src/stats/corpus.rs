//! Corpus ingestion: a directory of provenance records joined with a label
//! CSV (`repo_id, failure_mode, success_nb_count, total_exec_count`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assess::category_raws;
use crate::category::{Category, PerCategory};
use crate::failure_mode::FailureMode;
use crate::provenance::{ProvenanceError, ProvenanceRecord};
use crate::rubric::RubricProfile;
use crate::scoring::{compute_alpha, compute_rcs, compute_ros, compute_rrs, derive_proxy_evidence, CategoryRaw};
use crate::submetrics::SubMetricId;

pub const LABEL_COLUMNS: [&str; 4] = ["repo_id", "failure_mode", "success_nb_count", "total_exec_count"];

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Record { path: PathBuf, source: ProvenanceError },
    #[error("label file: {0}")]
    Labels(String),
    #[error("label file header must be exactly `repo_id,failure_mode,success_nb_count,total_exec_count`; got `{0}`")]
    Header(String),
    #[error("duplicate repo_id `{0}`")]
    Duplicate(String),
    #[error("label row for `{repo_id}`: {message}")]
    Row { repo_id: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub repo_id: String,
    pub failure_mode: FailureMode,
    pub success_nb_count: u64,
    pub total_exec_count: u64,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    repo_id: String,
    failure_mode: String,
    success_nb_count: u64,
    total_exec_count: u64,
}

/// Reads and validates the label CSV. Column names and order must match
/// [`LABEL_COLUMNS`].
pub fn read_labels(text: &str) -> Result<Vec<LabelRow>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CorpusError::Labels(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != LABEL_COLUMNS {
        return Err(CorpusError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    let mut seen = BTreeMap::new();
    for row in rdr.deserialize::<RawRow>() {
        let row = row.map_err(|e| CorpusError::Labels(e.to_string()))?;
        let failure_mode = row
            .failure_mode
            .parse::<FailureMode>()
            .map_err(|e| CorpusError::Row { repo_id: row.repo_id.clone(), message: e.to_string() })?;
        if row.success_nb_count > row.total_exec_count {
            return Err(CorpusError::Row {
                repo_id: row.repo_id,
                message: format!("success_nb_count {} exceeds total_exec_count {}", row.success_nb_count, row.total_exec_count),
            });
        }
        if seen.insert(row.repo_id.clone(), ()).is_some() {
            return Err(CorpusError::Duplicate(row.repo_id));
        }
        out.push(LabelRow {
            repo_id: row.repo_id,
            failure_mode,
            success_nb_count: row.success_nb_count,
            total_exec_count: row.total_exec_count,
        });
    }
    Ok(out)
}

/// One labeled repository with the quantities the diagnostics rescore from.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord {
    pub repo_id: String,
    pub label: LabelRow,
    pub record: ProvenanceRecord,
    /// Category raws under the record's own sub-metric weights.
    pub raws: PerCategory<CategoryRaw<f64>>,
    pub sigma: Option<f64>,
    pub rrs: f64,
    /// Proxy ROS from the label, when any probe is derivable.
    pub proxy_ros: Option<f64>,
    pub proxy_alpha: f64,
    pub proxy_rcs: f64,
}

impl CorpusRecord {
    pub fn new(record: ProvenanceRecord, label: LabelRow) -> Result<Self, ProvenanceError> {
        let rubric = record.rubric_profile()?;
        let raws = category_raws(&record.submetrics, &rubric)?;
        let sigma = record.score_of(SubMetricId::SeedManagement);
        let ev = derive_proxy_evidence::<f64>(label.failure_mode, label.success_nb_count, label.total_exec_count)?;
        let ros = compute_ros(&ev);
        let alpha = compute_alpha(&ev);
        Ok(CorpusRecord {
            repo_id: record.repository.repo_id.clone(),
            rrs: record.rrs,
            proxy_rcs: compute_rcs(record.rrs, ros, alpha),
            proxy_ros: ros,
            proxy_alpha: alpha,
            raws,
            sigma,
            label,
            record,
        })
    }

    pub fn failure_mode(&self) -> FailureMode {
        self.label.failure_mode
    }

    /// Binary label: success versus any failure.
    pub fn is_success(&self) -> bool {
        self.label.failure_mode == FailureMode::Success
    }

    pub fn raw(&self, c: Category) -> f64 {
        self.raws[c].raw
    }

    /// RRS under another rubric with the same sub-metric weights. Equivalent
    /// to recomputing from the provenance record, without re-aggregating.
    pub fn rescore(&self, rubric: &RubricProfile) -> Result<f64, crate::scoring::ScoringError> {
        Ok(compute_rrs(&self.raws, rubric, self.sigma)?.rrs)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub records: Vec<CorpusRecord>,
    /// Records without a label row, or label rows without a record.
    pub unmatched_records: Vec<String>,
    pub unmatched_labels: Vec<String>,
}

impl Corpus {
    /// Joins records and labels on `repo_id`; records keep label-file order.
    pub fn join(records: Vec<ProvenanceRecord>, labels: Vec<LabelRow>) -> Result<Self, CorpusError> {
        let mut by_id: BTreeMap<String, ProvenanceRecord> = BTreeMap::new();
        for r in records {
            let id = r.repository.repo_id.clone();
            if by_id.insert(id.clone(), r).is_some() {
                return Err(CorpusError::Duplicate(id));
            }
        }
        let mut out = Corpus::default();
        for label in labels {
            match by_id.remove(&label.repo_id) {
                Some(rec) => {
                    let id = label.repo_id.clone();
                    let cr = CorpusRecord::new(rec, label)
                        .map_err(|source| CorpusError::Record { path: PathBuf::from(&id), source })?;
                    out.records.push(cr);
                }
                None => out.unmatched_labels.push(label.repo_id),
            }
        }
        out.unmatched_records = by_id.into_keys().collect();
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(CorpusRecord::is_success).collect()
    }

    pub fn rrs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rrs).collect()
    }

    pub fn raws(&self, c: Category) -> Vec<f64> {
        self.records.iter().map(|r| r.raw(c)).collect()
    }

    /// Values of `f` grouped by failure mode, in taxonomy order, omitting
    /// empty groups.
    pub fn by_mode<F: Fn(&CorpusRecord) -> f64>(&self, f: F) -> Vec<(FailureMode, Vec<f64>)> {
        FailureMode::ALL
            .iter()
            .map(|&m| (m, self.records.iter().filter(|r| r.failure_mode() == m).map(&f).collect::<Vec<_>>()))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }
}

/// Provenance `*.json` files directly under `dir`, in file-name order.
pub fn read_records(dir: &Path) -> Result<Vec<ProvenanceRecord>, CorpusError> {
    let io = |e: std::io::Error| CorpusError::Io { path: dir.to_path_buf(), message: e.to_string() };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| CorpusError::Io { path: p.clone(), message: e.to_string() })?;
            ProvenanceRecord::from_json(&text).map_err(|source| CorpusError::Record { path: p, source })
        })
        .collect()
}

pub fn load_corpus(records_dir: &Path, labels_csv: &Path) -> Result<Corpus, CorpusError> {
    let records = read_records(records_dir)?;
    let text = fs::read_to_string(labels_csv)
        .map_err(|e| CorpusError::Io { path: labels_csv.to_path_buf(), message: e.to_string() })?;
    Corpus::join(records, read_labels(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_parse_and_validate() {
        let rows = read_labels("repo_id,failure_mode,success_nb_count,total_exec_count\na,success,2,2\nb,missing_module,1,26\n").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].failure_mode, FailureMode::MissingModule);
        assert!(matches!(read_labels("repo,failure_mode,success_nb_count,total_exec_count\n"), Err(CorpusError::Header(_))));
        assert!(matches!(
            read_labels("repo_id,failure_mode,success_nb_count,total_exec_count\na,success,3,2\n"),
            Err(CorpusError::Row { .. })
        ));
        assert!(matches!(
            read_labels("repo_id,failure_mode,success_nb_count,total_exec_count\na,crashed,0,0\n"),
            Err(CorpusError::Row { .. })
        ));
        assert!(matches!(
            read_labels("repo_id,failure_mode,success_nb_count,total_exec_count\na,success,0,0\na,success,0,0\n"),
            Err(CorpusError::Duplicate(_))
        ));
    }
}
