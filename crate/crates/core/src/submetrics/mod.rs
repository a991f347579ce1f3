//! The 26 rule-based sub-metrics.

mod code;
mod data;
mod docs;
mod environment;
pub mod registry;
mod signals;
mod support;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::patterns::Patterns;
use crate::repo::{RepoModels, RepoSnapshot};

pub use registry::{
    spec_of, MetricType, SubMetricId, SubMetricRegistry, SubMetricSpec, UnknownSubMetric, CONFIG_TIERS,
    CONTAINER_TIERS, DATA_DESCRIPTION_TIERS, DATA_POINTER_TIERS, DEP_PINNING_TIERS, EXPECTED_OUTPUT_TIERS,
    INSTALL_TIERS, REUSE_TIERS, USAGE_TIERS, WORKFLOW_TIERS,
};

/// Path used in evidence that concerns the repository as a whole.
pub const REPO_ROOT: &str = ".";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Evidence {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_number: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_pattern: Option<String>,
    pub note: String,
}

impl Evidence {
    pub fn file(path: impl Into<String>, note: impl Into<String>) -> Self {
        Evidence { path: path.into(), line_number: None, matched_pattern: None, note: note.into() }
    }

    pub fn matched(path: impl Into<String>, line: Option<usize>, pattern: impl Into<String>, note: impl Into<String>) -> Self {
        Evidence { path: path.into(), line_number: line, matched_pattern: Some(pattern.into()), note: note.into() }
    }

    pub fn repo(note: impl Into<String>) -> Self {
        Self::file(REPO_ROOT, note)
    }
}

/// One analyzer output. `score` is `None` when the sub-metric does not
/// apply to the repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubMetricResult {
    pub id: SubMetricId,
    pub category: Category,
    pub metric_type: MetricType,
    pub score: Option<f64>,
    pub evidence: Vec<Evidence>,
}

impl SubMetricResult {
    pub fn new(id: SubMetricId, score: Option<f64>, evidence: Vec<Evidence>) -> Self {
        let spec = spec_of(id);
        SubMetricResult { id, category: spec.category, metric_type: spec.metric_type, score, evidence }
    }

    pub fn is_applicable(&self) -> bool {
        self.score.is_some()
    }
}

/// Inputs shared by all analyzers.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisContext<'a> {
    pub snapshot: &'a RepoSnapshot,
    pub models: &'a RepoModels,
    pub patterns: &'a Patterns,
}

impl<'a> AnalysisContext<'a> {
    pub fn new(snapshot: &'a RepoSnapshot, models: &'a RepoModels, patterns: &'a Patterns) -> Self {
        AnalysisContext { snapshot, models, patterns }
    }
}

/// Runs one analyzer.
pub fn evaluate_submetric(id: SubMetricId, ctx: &AnalysisContext<'_>) -> SubMetricResult {
    use SubMetricId as Id;
    let mut r = match id {
        Id::DepPinning => environment::dep_pinning(ctx),
        Id::ContainerSpec => environment::container_spec(ctx),
        Id::EnvBootstrap => environment::env_bootstrap(ctx),
        Id::RuntimeVersion => environment::runtime_version(ctx),
        Id::DataDescription => data::data_description(ctx),
        Id::DataPointer => data::data_pointer(ctx),
        Id::WorkflowOrchestration => data::workflow_orchestration(ctx),
        Id::DataAcquisition => data::data_acquisition(ctx),
        Id::DocStructure => docs::doc_structure(ctx),
        Id::InstallInstructions => docs::install_instructions(ctx),
        Id::UsageExamples => docs::usage_examples(ctx),
        Id::InlineExplanation => docs::inline_explanation(ctx),
        Id::EntryPoint => docs::entry_point(ctx),
        Id::DocstringCoverage => docs::docstring_coverage(ctx),
        Id::ReuseMetadata => docs::reuse_metadata(ctx),
        Id::NoAbsolutePaths => code::no_absolute_paths(ctx),
        Id::ImportResolvability => code::import_resolvability(ctx),
        Id::NoHardcodedCreds => code::no_hardcoded_creds(ctx),
        Id::NoSilentFailures => code::no_silent_failures(ctx),
        Id::SeedManagement => signals::seed_management(ctx),
        Id::NotebookExecOrder => signals::notebook_exec_order(ctx),
        Id::TestFilePresence => signals::test_file_presence(ctx),
        Id::ExpectedOutputs => signals::expected_outputs(ctx),
        Id::CiPresence => signals::ci_presence(ctx),
        Id::ConfigExternalised => signals::config_externalised(ctx),
        Id::HardwareRequirements => signals::hardware_requirements(ctx),
    };
    r.evidence.sort();
    r.evidence.dedup();
    debug_assert!(r.score.is_none_or(|s| spec_of(id).allows(s)), "{id}: {:?}", r.score);
    r
}

/// Runs every registered analyzer, possibly in parallel. The result order
/// always matches the registry.
pub fn evaluate_all(ctx: &AnalysisContext<'_>, registry: &SubMetricRegistry) -> Vec<SubMetricResult> {
    registry.entries().par_iter().map(|spec| evaluate_submetric(spec.id, ctx)).collect()
}

/// Binary score from a boolean.
pub(crate) fn binary(hit: bool) -> f64 {
    if hit { 100.0 } else { 0.0 }
}
