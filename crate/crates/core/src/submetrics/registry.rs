use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::category::Category;

/// How a sub-metric's score is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricType {
    /// Only 0 or 100.
    Binary,
    /// Any value in `[0, 100]`.
    Continuous,
    /// One of a declared set of levels.
    Tiered,
}

macro_rules! submetric_ids {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// Identifier of one of the 26 atomic sub-metrics.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum SubMetricId {
            $($variant),+
        }

        impl SubMetricId {
            pub const ALL: [SubMetricId; 26] = [$(SubMetricId::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(SubMetricId::$variant => $name),+
                }
            }
        }

        impl FromStr for SubMetricId {
            type Err = UnknownSubMetric;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(SubMetricId::$variant),)+
                    other => Err(UnknownSubMetric(other.to_string())),
                }
            }
        }
    };
}

submetric_ids! {
    DepPinning => "dep_pinning",
    ContainerSpec => "container_spec",
    EnvBootstrap => "env_bootstrap",
    RuntimeVersion => "runtime_version",
    DataDescription => "data_description",
    DataPointer => "data_pointer",
    WorkflowOrchestration => "workflow_orchestration",
    DataAcquisition => "data_acquisition",
    DocStructure => "doc_structure",
    InstallInstructions => "install_instructions",
    UsageExamples => "usage_examples",
    InlineExplanation => "inline_explanation",
    EntryPoint => "entry_point",
    DocstringCoverage => "docstring_coverage",
    ReuseMetadata => "reuse_metadata",
    NoAbsolutePaths => "no_absolute_paths",
    ImportResolvability => "import_resolvability",
    NoHardcodedCreds => "no_hardcoded_creds",
    NoSilentFailures => "no_silent_failures",
    SeedManagement => "seed_management",
    NotebookExecOrder => "notebook_exec_order",
    TestFilePresence => "test_file_presence",
    ExpectedOutputs => "expected_outputs",
    CiPresence => "ci_presence",
    ConfigExternalised => "config_externalised",
    HardwareRequirements => "hardware_requirements",
}

impl fmt::Display for SubMetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown sub-metric `{0}`")]
pub struct UnknownSubMetric(pub String);

/// Registry entry: where a sub-metric lives and how it is weighted by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubMetricSpec {
    pub id: SubMetricId,
    pub category: Category,
    pub default_weight: f64,
    pub metric_type: MetricType,
    /// Allowed values for tiered metrics, ascending. Empty otherwise.
    pub tiers: &'static [f64],
}

impl SubMetricSpec {
    pub fn allows(&self, score: f64) -> bool {
        if !(0.0..=100.0).contains(&score) {
            return false;
        }
        match self.metric_type {
            MetricType::Binary => score == 0.0 || score == 100.0,
            MetricType::Continuous => true,
            MetricType::Tiered => self.tiers.contains(&score),
        }
    }
}

pub const DEP_PINNING_TIERS: &[f64] = &[0.0, 25.0, 40.0, 75.0, 100.0];
pub const CONTAINER_TIERS: &[f64] = &[0.0, 60.0, 100.0];
pub const DATA_DESCRIPTION_TIERS: &[f64] = &[0.0, 30.0, 60.0, 100.0];
pub const DATA_POINTER_TIERS: &[f64] = &[0.0, 25.0, 50.0, 75.0, 100.0];
pub const WORKFLOW_TIERS: &[f64] = &[0.0, 40.0, 60.0, 100.0];
pub const INSTALL_TIERS: &[f64] = &[0.0, 30.0, 60.0, 100.0];
pub const USAGE_TIERS: &[f64] = &[0.0, 40.0, 60.0, 100.0];
pub const REUSE_TIERS: &[f64] = &[0.0, 33.0, 66.0, 100.0];
pub const EXPECTED_OUTPUT_TIERS: &[f64] = &[0.0, 50.0, 100.0];
pub const CONFIG_TIERS: &[f64] = &[0.0, 50.0, 100.0];

const fn spec(
    id: SubMetricId,
    category: Category,
    default_weight: f64,
    metric_type: MetricType,
    tiers: &'static [f64],
) -> SubMetricSpec {
    SubMetricSpec { id, category, default_weight, metric_type, tiers }
}

use Category::{A, C, D, E, S};
use MetricType::{Binary as Bin, Continuous as Cont, Tiered as Tier};
use SubMetricId as Id;

static REGISTRY: [SubMetricSpec; 26] = [
    spec(Id::DepPinning, E, 0.25, Tier, DEP_PINNING_TIERS),
    spec(Id::ContainerSpec, E, 0.30, Tier, CONTAINER_TIERS),
    spec(Id::EnvBootstrap, E, 0.25, Bin, &[]),
    spec(Id::RuntimeVersion, E, 0.20, Bin, &[]),
    spec(Id::DataDescription, A, 0.20, Tier, DATA_DESCRIPTION_TIERS),
    spec(Id::DataPointer, A, 0.30, Tier, DATA_POINTER_TIERS),
    spec(Id::WorkflowOrchestration, A, 0.20, Tier, WORKFLOW_TIERS),
    spec(Id::DataAcquisition, A, 0.30, Bin, &[]),
    spec(Id::DocStructure, D, 0.25, Cont, &[]),
    spec(Id::InstallInstructions, D, 0.20, Tier, INSTALL_TIERS),
    spec(Id::UsageExamples, D, 0.20, Tier, USAGE_TIERS),
    spec(Id::InlineExplanation, D, 0.15, Cont, &[]),
    spec(Id::EntryPoint, D, 0.10, Bin, &[]),
    spec(Id::DocstringCoverage, D, 0.05, Cont, &[]),
    spec(Id::ReuseMetadata, D, 0.05, Tier, REUSE_TIERS),
    spec(Id::NoAbsolutePaths, C, 0.40, Cont, &[]),
    spec(Id::ImportResolvability, C, 0.35, Cont, &[]),
    spec(Id::NoHardcodedCreds, C, 0.15, Cont, &[]),
    spec(Id::NoSilentFailures, C, 0.10, Cont, &[]),
    spec(Id::SeedManagement, S, 0.30, Cont, &[]),
    spec(Id::NotebookExecOrder, S, 0.20, Cont, &[]),
    spec(Id::TestFilePresence, S, 0.18, Cont, &[]),
    spec(Id::ExpectedOutputs, S, 0.12, Tier, EXPECTED_OUTPUT_TIERS),
    spec(Id::CiPresence, S, 0.10, Bin, &[]),
    spec(Id::ConfigExternalised, S, 0.06, Tier, CONFIG_TIERS),
    spec(Id::HardwareRequirements, S, 0.04, Bin, &[]),
];

/// The ordered table of all 26 sub-metrics.
#[derive(Debug, Clone, Copy)]
pub struct SubMetricRegistry {
    entries: &'static [SubMetricSpec],
}

impl Default for SubMetricRegistry {
    fn default() -> Self {
        SubMetricRegistry { entries: &REGISTRY }
    }
}

impl SubMetricRegistry {
    pub fn entries(&self) -> &'static [SubMetricSpec] {
        self.entries
    }

    pub fn get(&self, id: SubMetricId) -> &'static SubMetricSpec {
        // Registry order matches `SubMetricId::ALL`.
        &self.entries[id as usize]
    }

    pub fn in_category(&self, category: Category) -> impl Iterator<Item = &'static SubMetricSpec> {
        self.entries.iter().filter(move |s| s.category == category)
    }
}

/// Shorthand for the registry entry of `id`.
pub fn spec_of(id: SubMetricId) -> &'static SubMetricSpec {
    &REGISTRY[id as usize]
}
