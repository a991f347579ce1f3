//! Provenance records: self-contained JSON documents binding scores to a
//! commit, a rubric and any execution evidence, rescorable without the
//! repository.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::assess::{blend, score_results, Assessment};
use crate::category::{Category, PerCategory};
use crate::repo::inventory::ScanNotes;
use crate::repo::RepoSnapshot;
use crate::rubric::{RubricError, RubricProfile, RubricSnapshot};
use crate::scoring::{EvidenceComponents, EvidenceDocument, ExecutionEvidence, ScoringError};
use crate::submetrics::{SubMetricId, SubMetricResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "readiness";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON Schema for records, as published in `schema/`.
pub const PROVENANCE_SCHEMA: &str = include_str!("../schema/provenance.schema.json");
pub const EVIDENCE_SCHEMA: &str = include_str!("../schema/evidence.schema.json");

#[derive(Debug, thiserror::Error)]
pub enum ProvenanceError {
    #[error("malformed provenance record: {0}")]
    Malformed(String),
    #[error("unsupported provenance schema version {found} (supported: {SCHEMA_VERSION})")]
    UnsupportedVersion { found: String },
    #[error("record rubric is invalid: {0}")]
    Rubric(#[from] RubricError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("record holds {found} sub-metric entries; expected each of the 26 exactly once")]
    SubMetricSet { found: usize },
    #[error("non-finite value in field `{0}`")]
    NonFinite(String),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepositoryInfo {
    pub source: String,
    pub repo_id: String,
    pub commit_id: String,
    pub scan: ScanNotes,
}

impl RepositoryInfo {
    pub fn of(snapshot: &RepoSnapshot) -> Self {
        RepositoryInfo {
            source: snapshot.source().to_string(),
            repo_id: snapshot.repo_id().to_string(),
            commit_id: snapshot.commit_id().to_string(),
            scan: snapshot.inventory().notes().clone(),
        }
    }

    /// First seven characters of the commit id.
    pub fn short_commit(&self) -> &str {
        if self.commit_id == crate::repo::UNCOMMITTED {
            return &self.commit_id;
        }
        let end = self.commit_id.char_indices().nth(7).map_or(self.commit_id.len(), |(i, _)| i);
        &self.commit_id[..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryRecord {
    pub raw: f64,
    pub applicable: bool,
    pub weight: f64,
    pub gated: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyRecord {
    pub environment: bool,
    pub data: bool,
    pub hard: f64,
    pub seed: f64,
    /// Seed-management score the seed penalty was judged on.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutionRecord {
    pub components: EvidenceComponents,
    pub ros: Option<f64>,
    pub alpha: f64,
    pub rcs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RubricRef {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecomputedFrom {
    pub repo_id: String,
    pub commit_id: String,
    pub timestamp: String,
    pub rubric: RubricRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceRecord {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub repository: RepositoryInfo,
    /// UTC, ISO-8601 with second precision.
    pub timestamp: String,
    pub rubric: RubricSnapshot,
    pub submetrics: Vec<SubMetricResult>,
    pub categories: BTreeMap<Category, CategoryRecord>,
    pub penalties: PenaltyRecord,
    pub weighted_sum: f64,
    pub rrs_unclamped: f64,
    pub rrs: f64,
    pub execution: Option<ExecutionRecord>,
    pub rcs: f64,
    pub recomputed_from: Option<RecomputedFrom>,
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp_now() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn execution_record(a: &Assessment) -> Option<ExecutionRecord> {
    a.execution.as_ref().map(|e| ExecutionRecord {
        components: EvidenceDocument::from_evidence(&e.evidence).components,
        ros: e.ros,
        alpha: e.alpha,
        rcs: e.rcs,
    })
}

/// Builds the record for `assessment` of the repository described by `repository`.
pub fn record_for(assessment: &Assessment, repository: RepositoryInfo, timestamp: String) -> ProvenanceRecord {
    let b = &assessment.breakdown;
    ProvenanceRecord {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo { name: TOOL_NAME.into(), version: TOOL_VERSION.into() },
        repository,
        timestamp,
        rubric: RubricSnapshot::from(&assessment.rubric),
        submetrics: assessment.submetrics.clone(),
        categories: b
            .categories
            .iter()
            .map(|(c, k)| {
                (c, CategoryRecord {
                    raw: k.raw,
                    applicable: k.applicable,
                    weight: k.weight,
                    gated: k.gated,
                    contribution: k.contribution,
                })
            })
            .collect(),
        penalties: PenaltyRecord {
            environment: b.hard_penalty.environment,
            data: b.hard_penalty.data,
            hard: b.hard_penalty.points,
            seed: b.seed_penalty,
            sigma: assessment.score_of(SubMetricId::SeedManagement),
        },
        weighted_sum: b.weighted_sum,
        rrs_unclamped: b.unclamped,
        rrs: b.rrs,
        execution: execution_record(assessment),
        rcs: assessment.rcs(),
        recomputed_from: None,
    }
}

/// Record for a freshly scored snapshot, stamped with the current time.
pub fn emit_provenance(assessment: &Assessment, snapshot: &RepoSnapshot) -> ProvenanceRecord {
    record_for(assessment, RepositoryInfo::of(snapshot), timestamp_now())
}

impl ProvenanceRecord {
    pub fn rubric_profile(&self) -> Result<RubricProfile, RubricError> {
        RubricProfile::try_from(&self.rubric)
    }

    pub fn evidence(&self) -> Result<Option<ExecutionEvidence<f64>>, ScoringError> {
        self.execution
            .as_ref()
            .map(|e| EvidenceDocument { components: e.components.clone() }.to_evidence())
            .transpose()
    }

    pub fn raw(&self, c: Category) -> f64 {
        self.categories.get(&c).map_or(0.0, |k| k.raw)
    }

    pub fn raws(&self) -> PerCategory<f64> {
        PerCategory::from_fn(|c| self.raw(c))
    }

    pub fn score_of(&self, id: SubMetricId) -> Option<f64> {
        self.submetrics.iter().find(|r| r.id == id).and_then(|r| r.score)
    }

    fn check_shape(&self) -> Result<(), ProvenanceError> {
        let mut ids: Vec<SubMetricId> = self.submetrics.iter().map(|r| r.id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != SubMetricId::ALL.len() || self.submetrics.len() != SubMetricId::ALL.len() {
            return Err(ProvenanceError::SubMetricSet { found: self.submetrics.len() });
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<(), ProvenanceError> {
        let mut fields: Vec<(String, f64)> = vec![
            ("weighted_sum".into(), self.weighted_sum),
            ("rrs_unclamped".into(), self.rrs_unclamped),
            ("rrs".into(), self.rrs),
            ("rcs".into(), self.rcs),
            ("penalties.hard".into(), self.penalties.hard),
            ("penalties.seed".into(), self.penalties.seed),
        ];
        for (c, k) in &self.categories {
            fields.extend([
                (format!("categories.{c}.raw"), k.raw),
                (format!("categories.{c}.weight"), k.weight),
                (format!("categories.{c}.gated"), k.gated),
                (format!("categories.{c}.contribution"), k.contribution),
            ]);
        }
        for r in &self.submetrics {
            if let Some(s) = r.score {
                fields.push((format!("submetrics.{}", r.id), s));
            }
        }
        if let Some(e) = &self.execution {
            fields.push(("execution.alpha".into(), e.alpha));
            fields.push(("execution.rcs".into(), e.rcs));
            if let Some(r) = e.ros {
                fields.push(("execution.ros".into(), r));
            }
        }
        match fields.into_iter().find(|(_, v)| !v.is_finite()) {
            Some((name, _)) => Err(ProvenanceError::NonFinite(name)),
            None => Ok(()),
        }
    }

    /// Canonical JSON value: keys sorted at every level.
    pub fn to_value(&self) -> Result<Value, ProvenanceError> {
        self.check_finite()?;
        let v = serde_json::to_value(self).map_err(|e| ProvenanceError::Serialize(e.to_string()))?;
        Ok(canonicalize(v))
    }

    /// Canonical pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, ProvenanceError> {
        let mut s = serde_json::to_string_pretty(&self.to_value()?)
            .map_err(|e| ProvenanceError::Serialize(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ProvenanceError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ProvenanceError::Malformed(e.to_string()))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self, ProvenanceError> {
        match v.get("schema_version") {
            Some(Value::Number(n)) if n.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
            Some(other) => return Err(ProvenanceError::UnsupportedVersion { found: other.to_string() }),
            None => return Err(ProvenanceError::Malformed("missing schema_version".into())),
        }
        let record: ProvenanceRecord =
            serde_json::from_value(v).map_err(|e| ProvenanceError::Malformed(e.to_string()))?;
        record.check_shape()?;
        Ok(record)
    }
}

/// Rebuilds a value with every object's keys in sorted order, independent of
/// how `serde_json` stores maps.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// Rescores a record under `rubric` from its stored sub-metric scores and
/// evidence. The original record is not modified.
pub fn recompute_assessment(record: &ProvenanceRecord, rubric: &RubricProfile) -> Result<Assessment, ProvenanceError> {
    record.check_shape()?;
    let violations = rubric.validate();
    if !violations.is_empty() {
        return Err(ProvenanceError::Rubric(RubricError::Invalid(violations)));
    }
    let evidence = record.evidence()?;
    let mut results = record.submetrics.clone();
    let order = |id: SubMetricId| SubMetricId::ALL.iter().position(|&x| x == id).unwrap_or(usize::MAX);
    results.sort_by_key(|r| order(r.id));
    Ok(score_results(results, rubric, evidence.as_ref())?)
}

/// Rescored record, marked with the identity of its source.
pub fn recompute_from_provenance(record: &ProvenanceRecord, rubric: &RubricProfile) -> Result<ProvenanceRecord, ProvenanceError> {
    let a = recompute_assessment(record, rubric)?;
    let mut out = record_for(&a, record.repository.clone(), timestamp_now());
    out.recomputed_from = Some(RecomputedFrom {
        repo_id: record.repository.repo_id.clone(),
        commit_id: record.repository.commit_id.clone(),
        timestamp: record.timestamp.clone(),
        rubric: RubricRef { name: record.rubric.name.clone(), version: record.rubric.version.clone() },
    });
    Ok(out)
}

/// Attaches execution evidence: ROS, α and RCS are (re)computed, RRS and
/// everything else is untouched.
pub fn compose(record: &ProvenanceRecord, evidence: &ExecutionEvidence<f64>) -> ProvenanceRecord {
    let b = blend(record.rrs, evidence);
    let mut out = record.clone();
    out.execution = Some(ExecutionRecord {
        components: EvidenceDocument::from_evidence(evidence).components,
        ros: b.ros,
        alpha: b.alpha,
        rcs: b.rcs,
    });
    out.rcs = b.rcs;
    out
}
