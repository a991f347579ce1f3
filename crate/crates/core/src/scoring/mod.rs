//! Readiness scoring algebra: gate, category aggregation, penalties and the
//! final readiness score, plus the outcome blend in [`outcome`].
//!
//! All functions here are generic over [`Scalar`] and free of I/O.

pub mod determinism;
pub mod outcome;

use serde::Serialize;

use crate::category::{Category, PerCategory};
use crate::rubric::RubricProfile;
use crate::scalar::{clamp, Scalar};

pub use outcome::{
    compute_alpha, compute_rcs, compute_ros, derive_proxy_evidence, EvidenceComponents, EvidenceDocument, ExecutionEvidence, Probe,
    ALPHA_MAX, ALPHA_MIN,
};

/// Raw-score threshold below which the environment penalty applies.
pub const HARD_PENALTY_THRESHOLD: f64 = 10.0;
pub const ENVIRONMENT_PENALTY: f64 = 20.0;
pub const DATA_PENALTY: f64 = 15.0;
/// Seed-management score below which the seed penalty applies.
pub const SEED_PENALTY_THRESHOLD: f64 = 50.0;
pub const SEED_PENALTY: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("score {0} outside [0, 100]")]
    ScoreOutOfRange(f64),
    #[error("gate threshold {0} outside (0, 100]")]
    ThresholdOutOfRange(f64),
    #[error("gate exponent {0} below 1")]
    ExponentBelowOne(f64),
    #[error("invalid rubric: {0}")]
    InvalidRubric(String),
    #[error("sub-metric `{id}` does not belong to category {category}")]
    ForeignSubMetric { id: String, category: Category },
    #[error("successful notebook count {success} exceeds executed count {total}")]
    CountMismatch { success: u64, total: u64 },
    #[error("evidence component {component} = {value} outside [0, 100]")]
    EvidenceOutOfRange { component: &'static str, value: f64 },
}

/// Power-law gate mapping a raw category score to a contribution in `[0, 1]`.
///
/// At or above `tau` the map is linear (`x / 100`); below it the score is
/// compressed as `(x / tau)^k * tau / 100`. Both branches meet at `tau / 100`.
pub fn gate<T: Scalar>(x: T, tau: T, k: T) -> Result<T, ScoringError> {
    let hundred = T::hundred();
    if !(x >= T::zero() && x <= hundred) {
        return Err(ScoringError::ScoreOutOfRange(x.as_f64()));
    }
    if !(tau > T::zero() && tau <= hundred) {
        return Err(ScoringError::ThresholdOutOfRange(tau.as_f64()));
    }
    if !(k >= T::one()) {
        return Err(ScoringError::ExponentBelowOne(k.as_f64()));
    }
    if x >= tau {
        Ok(x / hundred)
    } else {
        Ok((x / tau).powf(k) * tau / hundred)
    }
}

/// Raw score of one category together with its applicability flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryRaw<T> {
    pub raw: T,
    /// False when every sub-metric of the category was not applicable.
    pub applicable: bool,
}

/// Weighted mean of the applicable `(score, weight)` entries, with the
/// weights renormalized over the applicable set. `None` scores are skipped.
/// A category with no applicable entry scores 0 and is flagged.
pub fn aggregate_weighted<T: Scalar>(entries: impl IntoIterator<Item = (Option<T>, T)>) -> CategoryRaw<T> {
    let mut mass = T::zero();
    let mut acc = T::zero();
    let mut any = false;
    for (score, weight) in entries {
        if let Some(s) = score {
            any = true;
            mass = mass + weight;
            acc = acc + weight * s;
        }
    }
    if !any {
        return CategoryRaw { raw: T::zero(), applicable: false };
    }
    let raw = if mass > T::zero() { acc / mass } else { T::zero() };
    CategoryRaw { raw: clamp(raw, T::zero(), T::hundred()), applicable: true }
}

/// `20·[E < 10] + 15·[A < 10]`.
pub fn hard_penalty<T: Scalar>(environment_raw: T, data_raw: T) -> HardPenalty<T> {
    let threshold = T::lit(HARD_PENALTY_THRESHOLD);
    let environment = environment_raw < threshold;
    let data = data_raw < threshold;
    let mut points = T::zero();
    if environment {
        points = points + T::lit(ENVIRONMENT_PENALTY);
    }
    if data {
        points = points + T::lit(DATA_PENALTY);
    }
    HardPenalty { environment, data, points }
}

/// `10·[σ < 50]`; no stochastic code (σ not applicable) means no penalty.
pub fn seed_penalty<T: Scalar>(sigma: Option<T>) -> T {
    match sigma {
        Some(s) if s < T::lit(SEED_PENALTY_THRESHOLD) => T::lit(SEED_PENALTY),
        _ => T::zero(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardPenalty<T> {
    /// Environment raw score fell below the threshold.
    pub environment: bool,
    /// Data-accessibility raw score fell below the threshold.
    pub data: bool,
    pub points: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryContribution<T> {
    pub raw: T,
    pub applicable: bool,
    pub weight: T,
    pub gated: T,
    /// `100 · weight · gated`, in score points.
    pub contribution: T,
}

/// Full audit trail of one readiness-score evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RrsBreakdown<T> {
    pub categories: PerCategory<CategoryContribution<T>>,
    pub weighted_sum: T,
    pub hard_penalty: HardPenalty<T>,
    pub seed_penalty: T,
    /// Value before clamping to `[0, 100]`.
    pub unclamped: T,
    pub rrs: T,
}

/// Readiness score: `clamp(100·Σ wᵢ·g(xᵢ) − P_hard − P_seed, 0, 100)`.
pub fn compute_rrs<T: Scalar>(
    categories: &PerCategory<CategoryRaw<T>>,
    rubric: &RubricProfile,
    sigma: Option<T>,
) -> Result<RrsBreakdown<T>, ScoringError> {
    let violations = rubric.validate();
    if !violations.is_empty() {
        let msg = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        return Err(ScoringError::InvalidRubric(msg));
    }
    let hundred = T::hundred();
    let mut contributions = Vec::with_capacity(5);
    for c in Category::ALL {
        let policy = rubric.policy(c);
        let raw = categories[c];
        let weight = T::lit(policy.weight);
        let gated = gate(raw.raw, T::lit(policy.tau), T::lit(policy.k))?;
        contributions.push(CategoryContribution {
            raw: raw.raw,
            applicable: raw.applicable,
            weight,
            gated,
            contribution: hundred * weight * gated,
        });
    }
    let categories = PerCategory::from_fn(|c| contributions[c.index()]);
    let weighted_sum = categories.0.iter().fold(T::zero(), |acc, c| acc + c.contribution);
    let hard = hard_penalty(categories[Category::E].raw, categories[Category::A].raw);
    let seed = seed_penalty(sigma);
    let unclamped = weighted_sum - hard.points - seed;
    Ok(RrsBreakdown {
        categories,
        weighted_sum,
        hard_penalty: hard,
        seed_penalty: seed,
        unclamped,
        rrs: clamp(unclamped, T::zero(), hundred),
    })
}

/// Convenience for tests and diagnostics: builds applicable raws from plain values.
pub fn raws<T: Scalar>(values: [T; 5]) -> PerCategory<CategoryRaw<T>> {
    PerCategory(values.map(|raw| CategoryRaw { raw, applicable: true }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gate_half_threshold_matches_closed_form() {
        let g = gate(20.0_f64, 40.0, 1.5).unwrap();
        assert!((g - 2f64.powf(-1.5) * 0.40).abs() < 1e-15);
        assert!((g - 0.141421).abs() < 1e-6);
    }

    #[test]
    fn gate_linear_regime_and_endpoints() {
        assert_eq!(gate(50.0_f64, 40.0, 1.5).unwrap(), 0.5);
        assert_eq!(gate(0.0_f64, 40.0, 1.5).unwrap(), 0.0);
        assert_eq!(gate(100.0_f64, 40.0, 1.5).unwrap(), 1.0);
        assert_eq!(gate(40.0_f64, 40.0, 1.5).unwrap(), 0.4);
    }

    #[test]
    fn gate_rejects_domain_violations() {
        assert!(matches!(gate(-1.0_f64, 40.0, 1.5), Err(ScoringError::ScoreOutOfRange(_))));
        assert!(matches!(gate(101.0_f64, 40.0, 1.5), Err(ScoringError::ScoreOutOfRange(_))));
        assert!(matches!(gate(f64::NAN, 40.0, 1.5), Err(ScoringError::ScoreOutOfRange(_))));
        assert!(matches!(gate(10.0_f64, 0.0, 1.5), Err(ScoringError::ThresholdOutOfRange(_))));
        assert!(matches!(gate(10.0_f64, 40.0, 0.9), Err(ScoringError::ExponentBelowOne(_))));
    }

    #[test]
    fn gate_in_f32_agrees_with_f64() {
        for x in [0.0, 5.0, 19.9, 20.0, 33.3, 40.0, 77.0, 100.0] {
            let a = gate(x as f32, 40.0, 1.5).unwrap() as f64;
            let b = gate(x, 40.0, 1.5).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn aggregation_examples() {
        let e = aggregate_weighted([(Some(100.0), 0.25), (Some(100.0), 0.30), (Some(100.0), 0.25), (Some(100.0), 0.20)]);
        assert!((e.raw - 100.0_f64).abs() < 1e-12);
        let c = aggregate_weighted([(Some(100.0), 0.40), (Some(0.0), 0.35), (Some(100.0), 0.15), (Some(100.0), 0.10)]);
        assert!((c.raw - 65.0_f64).abs() < 1e-12);
        let none: CategoryRaw<f64> = aggregate_weighted([(None, 0.5), (None, 0.5)]);
        assert_eq!(none, CategoryRaw { raw: 0.0, applicable: false });
    }

    #[test]
    fn aggregation_renormalizes_over_applicable_mass() {
        // S with hardware (0.04) not applicable: remaining mass 0.96.
        let s = aggregate_weighted([
            (Some(50.0), 0.30),
            (Some(0.0), 0.20),
            (Some(0.0), 0.18),
            (Some(0.0), 0.12),
            (Some(0.0), 0.10),
            (Some(0.0), 0.06),
            (None, 0.04),
        ]);
        assert!((s.raw - 50.0 * 0.30 / 0.96_f64).abs() < 1e-12);
    }

    #[test]
    fn penalties_use_strict_inequalities() {
        assert_eq!(hard_penalty(5.0_f64, 50.0).points, 20.0);
        assert_eq!(hard_penalty(5.0_f64, 5.0).points, 35.0);
        assert_eq!(hard_penalty(10.0_f64, 10.0).points, 0.0);
        assert_eq!(hard_penalty(9.99_f64, 10.0).points, 20.0);
        assert_eq!(seed_penalty(Some(40.0_f64)), 10.0);
        assert_eq!(seed_penalty(Some(50.0_f64)), 0.0);
        assert_eq!(seed_penalty::<f64>(None), 0.0);
    }

    #[test]
    fn rrs_linear_regime_worked_example() {
        let r = compute_rrs(&raws([50.0, 40.0, 30.0, 25.0, 30.0]), &RubricProfile::default(), Some(100.0)).unwrap();
        assert!((r.rrs - 37.75_f64).abs() < 1e-12);
        assert_eq!(r.hard_penalty.points, 0.0);
    }

    #[test]
    fn rrs_extremes() {
        let rubric = RubricProfile::default();
        let top = compute_rrs(&raws([100.0_f64; 5]), &rubric, Some(100.0)).unwrap();
        assert!((top.rrs - 100.0).abs() < 1e-12);
        let bottom = compute_rrs(&raws([0.0_f64; 5]), &rubric, Some(0.0)).unwrap();
        assert_eq!(bottom.unclamped, -45.0);
        assert_eq!(bottom.rrs, 0.0);
    }

    #[test]
    fn rrs_rejects_invalid_rubric() {
        let mut rubric = RubricProfile::default();
        rubric.categories[Category::E].k = 0.5;
        assert!(matches!(
            compute_rrs(&raws([50.0_f64; 5]), &rubric, None),
            Err(ScoringError::InvalidRubric(_))
        ));
    }

    proptest! {
        #[test]
        fn gate_is_monotone(a in 0.0f64..=100.0, b in 0.0f64..=100.0, tau in 0.5f64..=100.0, k in 1.0f64..4.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(gate(lo, tau, k).unwrap() <= gate(hi, tau, k).unwrap());
        }

        #[test]
        fn gate_with_unit_exponent_is_linear(x in 0.0f64..=100.0, tau in 0.5f64..=100.0) {
            prop_assert!((gate(x, tau, 1.0).unwrap() - x / 100.0).abs() < 1e-12);
        }

        #[test]
        fn rrs_stays_in_range(xs in prop::array::uniform5(0.0f64..=100.0), sigma in prop::option::of(0.0f64..=100.0)) {
            let r = compute_rrs(&raws(xs), &RubricProfile::default(), sigma).unwrap();
            prop_assert!((0.0..=100.0).contains(&r.rrs));
        }
    }
}
