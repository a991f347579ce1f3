//! End-to-end assessment: sub-metric results → category raws → readiness
//! score, optionally blended with execution evidence.
//!
//! Direct scoring and rescoring from provenance both go through
//! [`score_results`], so the two agree exactly.

use crate::category::{Category, PerCategory};
use crate::patterns::Patterns;
use crate::repo::{acquire_repository, AcquisitionError, RepoModels, RepoSnapshot};
use crate::rubric::RubricProfile;
use crate::scoring::{
    aggregate_weighted, compute_alpha, compute_rcs, compute_ros, compute_rrs, CategoryRaw, ExecutionEvidence,
    RrsBreakdown, ScoringError,
};
use crate::submetrics::{evaluate_all, AnalysisContext, SubMetricId, SubMetricRegistry, SubMetricResult};

/// ROS, α and RCS for one evidence document.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeBlend {
    pub evidence: ExecutionEvidence<f64>,
    pub ros: Option<f64>,
    pub alpha: f64,
    pub rcs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub rubric: RubricProfile,
    /// One result per registered sub-metric, in registry order.
    pub submetrics: Vec<SubMetricResult>,
    pub breakdown: RrsBreakdown<f64>,
    pub execution: Option<OutcomeBlend>,
}

impl Assessment {
    pub fn rrs(&self) -> f64 {
        self.breakdown.rrs
    }

    /// Composite score; equals the readiness score without evidence.
    pub fn rcs(&self) -> f64 {
        self.execution.as_ref().map_or(self.breakdown.rrs, |e| e.rcs)
    }

    pub fn raw(&self, c: Category) -> f64 {
        self.breakdown.categories[c].raw
    }

    pub fn result(&self, id: SubMetricId) -> Option<&SubMetricResult> {
        self.submetrics.iter().find(|r| r.id == id)
    }

    pub fn score_of(&self, id: SubMetricId) -> Option<f64> {
        self.result(id).and_then(|r| r.score)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssessError {
    #[error(transparent)]
    Acquisition(#[from] AcquisitionError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Raw score of `category` from its sub-metric results under the rubric's
/// within-category weights. Not-applicable results are renormalized out.
pub fn aggregate_category(
    results: &[SubMetricResult],
    category: Category,
    rubric: &RubricProfile,
) -> Result<CategoryRaw<f64>, ScoringError> {
    let mut entries = Vec::new();
    for r in results.iter().filter(|r| r.category == category) {
        if crate::submetrics::spec_of(r.id).category != category {
            return Err(ScoringError::ForeignSubMetric { id: r.id.to_string(), category });
        }
        if let Some(s) = r.score {
            if !(0.0..=100.0).contains(&s) {
                return Err(ScoringError::ScoreOutOfRange(s));
            }
        }
        entries.push((r.score, rubric.submetric_weight(r.id)));
    }
    Ok(aggregate_weighted(entries))
}

pub fn category_raws(results: &[SubMetricResult], rubric: &RubricProfile) -> Result<PerCategory<CategoryRaw<f64>>, ScoringError> {
    for r in results {
        if crate::submetrics::spec_of(r.id).category != r.category {
            return Err(ScoringError::ForeignSubMetric { id: r.id.to_string(), category: r.category });
        }
    }
    let mut out = PerCategory::from_fn(|_| CategoryRaw { raw: 0.0, applicable: false });
    for c in Category::ALL {
        out[c] = aggregate_category(results, c, rubric)?;
    }
    Ok(out)
}

pub fn blend(rrs: f64, evidence: &ExecutionEvidence<f64>) -> OutcomeBlend {
    let ros = compute_ros(evidence);
    let alpha = compute_alpha(evidence);
    OutcomeBlend { evidence: evidence.clone(), ros, alpha, rcs: compute_rcs(rrs, ros, alpha) }
}

/// Scores already-evaluated sub-metric results under `rubric`.
pub fn score_results(
    results: Vec<SubMetricResult>,
    rubric: &RubricProfile,
    evidence: Option<&ExecutionEvidence<f64>>,
) -> Result<Assessment, ScoringError> {
    let raws = category_raws(&results, rubric)?;
    let sigma = results.iter().find(|r| r.id == SubMetricId::SeedManagement).and_then(|r| r.score);
    let breakdown = compute_rrs(&raws, rubric, sigma)?;
    let execution = evidence.map(|e| blend(breakdown.rrs, e));
    Ok(Assessment { rubric: rubric.clone(), submetrics: results, breakdown, execution })
}

pub fn assess_snapshot(
    snapshot: &RepoSnapshot,
    rubric: &RubricProfile,
    patterns: &Patterns,
) -> Result<Assessment, ScoringError> {
    let models = RepoModels::build(snapshot);
    let ctx = AnalysisContext::new(snapshot, &models, patterns);
    let results = evaluate_all(&ctx, &SubMetricRegistry::default());
    score_results(results, rubric, None)
}

/// Acquires `source` (shallow) and assesses it.
pub fn assess(source: &str, rubric: &RubricProfile, patterns: &Patterns) -> Result<(RepoSnapshot, Assessment), AssessError> {
    let snapshot = acquire_repository(source, true)?;
    let a = assess_snapshot(&snapshot, rubric, patterns)?;
    Ok((snapshot, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submetrics::SubMetricResult;

    fn all_scores(score: Option<f64>) -> Vec<SubMetricResult> {
        SubMetricId::ALL.iter().map(|&id| SubMetricResult::new(id, score, vec![])).collect()
    }

    #[test]
    fn perfect_results_score_100() {
        let a = score_results(all_scores(Some(100.0)), &RubricProfile::default_profile(), None).unwrap();
        assert!((a.rrs() - 100.0).abs() < 1e-9);
        assert_eq!(a.rcs(), a.rrs());
    }

    #[test]
    fn all_not_applicable_scores_zero_with_flags() {
        let a = score_results(all_scores(None), &RubricProfile::default_profile(), None).unwrap();
        assert_eq!(a.rrs(), 0.0);
        assert!(a.breakdown.categories.iter().all(|(_, c)| !c.applicable));
        assert_eq!(a.breakdown.unclamped, -35.0);
    }

    #[test]
    fn c_category_example() {
        let mut r = all_scores(Some(100.0));
        r.iter_mut().find(|x| x.id == SubMetricId::ImportResolvability).unwrap().score = Some(0.0);
        let raw = aggregate_category(&r, Category::C, &RubricProfile::default_profile()).unwrap();
        assert!((raw.raw - 65.0).abs() < 1e-12);
    }

    #[test]
    fn hardware_not_applicable_renormalizes_s() {
        let mut r = all_scores(Some(0.0));
        r.iter_mut().find(|x| x.id == SubMetricId::HardwareRequirements).unwrap().score = None;
        r.iter_mut().find(|x| x.id == SubMetricId::CiPresence).unwrap().score = Some(100.0);
        let raw = aggregate_category(&r, Category::S, &RubricProfile::default_profile()).unwrap();
        assert!((raw.raw - 100.0 * 0.10 / 0.96).abs() < 1e-12);
    }
}
