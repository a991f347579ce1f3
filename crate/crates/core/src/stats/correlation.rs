//! Point-biserial correlation and Cohen's d.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{check_finite, mean, sample_variance, StatsError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointBiserial<T> {
    pub r: T,
    /// Two-sided p from the t-test on r with `n − 2` df.
    pub p: f64,
}

/// Pearson correlation between `scores` and a 0/1 label.
pub fn point_biserial<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<PointBiserial<T>, StatsError> {
    if scores.len() != labels.len() {
        return Err(StatsError::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    check_finite(scores)?;
    let n1 = labels.iter().filter(|&&l| l).count();
    let n0 = labels.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(StatsError::SingleClass);
    }
    if scores.len() < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, got: scores.len() });
    }
    let pick = |want: bool| -> Vec<T> { scores.iter().zip(labels).filter(|(_, &l)| l == want).map(|(&s, _)| s).collect() };
    let (m1, m0) = (mean(&pick(true)), mean(&pick(false)));
    let n = T::from_usize_lossy(scores.len());
    let m = mean(scores);
    // population standard deviation
    let sd = (scores.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m)) / n).sqrt();
    if sd <= T::zero() {
        return Err(StatsError::DegenerateDispersion);
    }
    let frac = T::from_usize_lossy(n1) * T::from_usize_lossy(n0) / (n * n);
    let r = (m1 - m0) / sd * frac.sqrt();
    let r = r.max(-T::one()).min(T::one());
    let df = scores.len() as f64 - 2.0;
    let rf = r.as_f64();
    let p = if rf.abs() >= 1.0 {
        0.0
    } else {
        let t = rf * (df / (1.0 - rf * rf)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|_| StatsError::TooFewObservations { needed: 3, got: scores.len() })?;
        (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
    };
    Ok(PointBiserial { r, p })
}

/// `(mean(a) − mean(b)) / s_pooled`, with the pooled sample standard
/// deviation `√(((n_a − 1)s_a² + (n_b − 1)s_b²) / (n_a + n_b − 2))`.
pub fn cohens_d<T: Scalar>(a: &[T], b: &[T]) -> Result<T, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    if a.len() + b.len() < 3 {
        return Err(StatsError::DegenerateDispersion);
    }
    let ss = |xs: &[T]| {
        if xs.len() < 2 {
            T::zero()
        } else {
            sample_variance(xs) * T::from_usize_lossy(xs.len() - 1)
        }
    };
    let pooled = (ss(a) + ss(b)) / T::from_usize_lossy(a.len() + b.len() - 2);
    if pooled <= T::zero() {
        let (ma, mb) = (mean(a), mean(b));
        if ma == mb {
            return Ok(T::zero());
        }
        return Err(StatsError::DegenerateDispersion);
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt())
}
