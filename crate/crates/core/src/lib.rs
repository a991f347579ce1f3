//! Static reproducibility-readiness assessment for research repositories.
//!
//! The pipeline: [`repo`] acquires and parses a repository, [`submetrics`]
//! runs the 26 analyzers, [`scoring`] turns category raws into the
//! readiness score and blends in execution evidence, [`rubric`] holds the
//! weighting policy, [`provenance`] records results and rescoring, and
//! [`stats`] runs corpus-level diagnostics.

pub mod assess;
pub mod category;
pub mod failure_mode;
pub mod patterns;
pub mod provenance;
pub mod repo;
pub mod rubric;
pub mod scalar;
pub mod scoring;
pub mod stats;
pub mod submetrics;

pub use assess::{assess, assess_snapshot, Assessment};
pub use category::{Category, PerCategory};
pub use failure_mode::{aggregate_failure_mode, FailureMode};
pub use patterns::Patterns;
pub use provenance::ProvenanceRecord;
pub use repo::{acquire_repository, RepoModels, RepoSnapshot};
pub use rubric::RubricProfile;
pub use scalar::Scalar;
pub use submetrics::{evaluate_all, SubMetricId, SubMetricRegistry, SubMetricResult};

/// `f64` instantiations of the generic scoring types.
pub type CategoryRaw = scoring::CategoryRaw<f64>;
pub type RrsBreakdown = scoring::RrsBreakdown<f64>;
pub type ExecutionEvidence = scoring::ExecutionEvidence<f64>;
pub type DeterminismReport = scoring::determinism::DeterminismReport<f64>;
