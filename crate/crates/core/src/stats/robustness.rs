//! Weight-robustness diagnostics: perturbation with proportional
//! redistribution, leave-one-category-out and the simplex grid search.

use rayon::prelude::*;
use serde::Serialize;

use super::corpus::Corpus;
use super::rank::{auc_roc, kendall_tau};
use super::StatsError;
use crate::category::{Category, PerCategory};
use crate::rubric::RubricProfile;

fn rescore_all(corpus: &Corpus, rubric: &RubricProfile) -> Result<Vec<f64>, StatsError> {
    corpus
        .records
        .iter()
        .map(|r| r.rescore(rubric).map_err(|e| StatsError::Rescore(e.to_string())))
        .collect()
}

/// Sets category `c` to `new_weight` and rescales the other four so the
/// total stays at the original sum.
pub fn redistribute(weights: &PerCategory<f64>, c: Category, new_weight: f64) -> PerCategory<f64> {
    if new_weight == weights[c] {
        return *weights;
    }
    let total: f64 = weights.0.iter().sum();
    let others = total - weights[c];
    let remaining = total - new_weight;
    PerCategory::from_fn(|k| {
        if k == c {
            new_weight
        } else if others > 0.0 {
            weights[k] * remaining / others
        } else {
            remaining / 4.0
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationStep {
    /// Multiplier applied to the category weight.
    pub factor: f64,
    pub weight: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationResult {
    pub category: Category,
    pub min_tau: f64,
    pub steps: Vec<PerturbationStep>,
    /// Set when some ranking was constant and τ was taken as 1.
    pub note: Option<String>,
}

/// Sweeps each category weight over `w·(1 − span) ..= w·(1 + span)` in
/// `steps` equal steps, redistributing the remainder over the other
/// categories, and reports the minimum Kendall τ of the RRS ranking against
/// the baseline.
pub fn weight_perturbation(
    corpus: &Corpus,
    rubric: &RubricProfile,
    span: f64,
    steps: usize,
) -> Result<Vec<PerturbationResult>, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    if !(0.0..1.0).contains(&span) {
        return Err(StatsError::InvalidSpan(span));
    }
    if steps == 0 {
        return Err(StatsError::InvalidSteps);
    }
    let base_weights = PerCategory::from_fn(|c| rubric.weight(c));
    let baseline = rescore_all(corpus, rubric)?;
    Category::ALL
        .iter()
        .map(|&c| {
            let points: Vec<f64> = (0..=steps)
                .map(|i| if 2 * i == steps { 1.0 } else { 1.0 - span + 2.0 * span * i as f64 / steps as f64 })
                .collect();
            let taus: Vec<Result<(PerturbationStep, bool), StatsError>> = points
                .par_iter()
                .map(|&factor| {
                    let w = base_weights[c] * factor;
                    let perturbed = rubric.with_weights(redistribute(&base_weights, c, w));
                    assert!(perturbed.is_valid(), "proportional redistribution keeps the rubric valid");
                    let scores = rescore_all(corpus, &perturbed)?;
                    let tau = kendall_tau(&baseline, &scores)?;
                    Ok((PerturbationStep { factor, weight: w, tau: tau.unwrap_or(1.0) }, tau.is_none()))
                })
                .collect();
            let mut out = Vec::with_capacity(taus.len());
            let mut degenerate = false;
            for t in taus {
                let (step, d) = t?;
                degenerate |= d;
                out.push(step);
            }
            let min_tau = out.iter().map(|s| s.tau).fold(f64::INFINITY, f64::min);
            Ok(PerturbationResult {
                category: c,
                min_tau,
                steps: out,
                note: degenerate.then(|| "degenerate ranking".to_string()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocoRow {
    /// `None` for the full model.
    pub removed: Option<Category>,
    pub auc: f64,
    /// AUC minus the full-model AUC.
    pub delta: f64,
}

/// Full-model AUC followed by one row per removed category (weight zeroed,
/// the rest renormalized).
pub fn loco_analysis(corpus: &Corpus, rubric: &RubricProfile) -> Result<Vec<LocoRow>, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let labels = corpus.labels();
    let full = auc_roc(&rescore_all(corpus, rubric)?, &labels)?;
    let base = PerCategory::from_fn(|c| rubric.weight(c));
    let mut rows = vec![LocoRow { removed: None, auc: full, delta: 0.0 }];
    for c in Category::ALL {
        let others: f64 = Category::ALL.iter().filter(|&&k| k != c).map(|&k| base[k]).sum();
        if others <= 0.0 {
            return Err(StatsError::Rescore(format!("removing {c} leaves no weight")));
        }
        let w = PerCategory::from_fn(|k| if k == c { 0.0 } else { base[k] / others });
        let auc = auc_roc(&rescore_all(corpus, &rubric.with_weights(w))?, &labels)?;
        rows.push(LocoRow { removed: Some(c), auc, delta: auc - full });
    }
    Ok(rows)
}

/// All weight vectors with entries in multiples of `step`, each at least
/// `floor`, summing to 1, in lexicographic order.
pub fn grid_configurations(step: f64, floor: f64) -> Result<Vec<PerCategory<f64>>, StatsError> {
    let infeasible = StatsError::InfeasibleGrid { step, floor };
    if !(step > 0.0 && step <= 1.0) || !(floor >= 0.0) {
        return Err(infeasible);
    }
    let units = (1.0 / step).round();
    let floor_units = (floor / step).round();
    if (units * step - 1.0).abs() > 1e-9 || (floor_units * step - floor).abs() > 1e-9 {
        return Err(infeasible);
    }
    let (units, floor_units) = (units as usize, floor_units as usize);
    if 5 * floor_units > units {
        return Err(infeasible);
    }
    let mut out = Vec::new();
    let mut k = [0usize; 5];
    fn rec(i: usize, left: usize, floor: usize, units: usize, k: &mut [usize; 5], out: &mut Vec<PerCategory<f64>>) {
        if i == 4 {
            if left >= floor {
                k[4] = left;
                out.push(PerCategory(k.map(|x| x as f64 / units as f64)));
            }
            return;
        }
        let reserve = floor * (4 - i);
        for v in floor..=left.saturating_sub(reserve) {
            k[i] = v;
            rec(i + 1, left - v, floor, units, k, out);
        }
    }
    rec(0, units, floor_units, units, &mut k, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub best_weights: PerCategory<f64>,
    pub best_auc: f64,
    pub n_configs: usize,
    /// AUC under the rubric's own weights, which need not lie on the grid.
    pub baseline_auc: f64,
}

/// Rescores the corpus under every grid configuration and keeps the highest
/// AUC. Ties keep the first configuration in enumeration order.
pub fn grid_search_weights(corpus: &Corpus, rubric: &RubricProfile, step: f64, floor: f64) -> Result<GridResult, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let configs = grid_configurations(step, floor)?;
    let labels = corpus.labels();
    let baseline_auc = auc_roc(&rescore_all(corpus, rubric)?, &labels)?;
    let aucs: Vec<Result<f64, StatsError>> = configs
        .par_iter()
        .map(|w| auc_roc(&rescore_all(corpus, &rubric.with_weights(*w))?, &labels))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, a) in aucs.into_iter().enumerate() {
        let a = a?;
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((i, a));
        }
    }
    let (i, best_auc) = best.ok_or(StatsError::InfeasibleGrid { step, floor })?;
    Ok(GridResult { best_weights: configs[i], best_auc, n_configs: configs.len(), baseline_auc })
}
