//! Corpus-level diagnostics over labeled provenance records.
//!
//! The statistical primitives are generic over [`Scalar`](crate::Scalar);
//! p-values come from `statrs` distributions in `f64`. Ties get average
//! ranks everywhere.

pub mod bootstrap;
pub mod corpus;
pub mod correlation;
pub mod multiple;
pub mod rank;
pub mod report;
pub mod robustness;

pub use bootstrap::{bootstrap_auc_ci, BootstrapCi, DEFAULT_RESAMPLES};
pub use corpus::{load_corpus, read_labels, Corpus, CorpusError, CorpusRecord, LabelRow};
pub use correlation::{cohens_d, point_biserial, PointBiserial};
pub use multiple::benjamini_hochberg;
pub use rank::{auc_roc, average_ranks, kendall_tau, kruskal_wallis, ks_statistic, mann_whitney, KruskalWallis, MannWhitney};
pub use report::{run_diagnostics, Analysis, DiagnosticsOptions, DiagnosticsReport};
pub use robustness::{grid_configurations, grid_search_weights, loco_analysis, weight_perturbation, GridResult, LocoRow, PerturbationResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} groups, got {got}")]
    TooFewGroups { needed: usize, got: usize },
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("sample is empty")]
    EmptySample,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("both label classes must be present")]
    SingleClass,
    #[error("degenerate dispersion")]
    DegenerateDispersion,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("p-value {0} outside [0, 1]")]
    PValueOutOfRange(f64),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("at least {min} resamples required, got {got}")]
    TooFewResamples { min: usize, got: usize },
    #[error("confidence level {0} outside (0, 1)")]
    InvalidLevel(f64),
    #[error("perturbation span {0} outside [0, 1)")]
    InvalidSpan(f64),
    #[error("perturbation needs at least one step")]
    InvalidSteps,
    #[error("grid step {step} with floor {floor} is infeasible over 5 categories")]
    InfeasibleGrid { step: f64, floor: f64 },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("rescoring failed: {0}")]
    Rescore(String),
}

pub(crate) fn check_finite<T: crate::Scalar>(xs: &[T]) -> Result<(), StatsError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

pub(crate) fn mean<T: crate::Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(xs.len())
}

/// Sample variance with `n − 1` denominator.
pub(crate) fn sample_variance<T: crate::Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    xs.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m)) / T::from_usize_lossy(xs.len() - 1)
}
