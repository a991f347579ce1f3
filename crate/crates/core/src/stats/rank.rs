//! Rank-based statistics: Kruskal-Wallis, Mann-Whitney, AUC, KS and Kendall τ-b.

use std::cmp::Ordering;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::{check_finite, StatsError};
use crate::scalar::Scalar;

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1
        let avg = T::from_usize_lossy(i + j + 2) / T::lit(2.0);
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of the tie groups among `values`.
fn tie_sizes<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        out.push(j);
        i += j;
    }
    out
}

/// `Σ (t³ − t)` over tie groups.
fn tie_term<T: Scalar>(values: &[T]) -> T {
    tie_sizes(values)
        .into_iter()
        .map(|t| {
            let t = T::from_usize_lossy(t);
            t * t * t - t
        })
        .fold(T::zero(), |a, b| a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KruskalWallis<T> {
    pub h: T,
    pub p: f64,
    pub df: usize,
}

/// Kruskal-Wallis H with tie correction; p from χ² with `groups − 1` df.
/// When every value is identical H is 0 and p is 1.
pub fn kruskal_wallis<T: Scalar>(groups: &[Vec<T>]) -> Result<KruskalWallis<T>, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups { needed: 2, got: groups.len() });
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(StatsError::EmptyGroup(i));
    }
    let pooled: Vec<T> = groups.iter().flatten().copied().collect();
    check_finite(&pooled)?;
    let df = groups.len() - 1;
    let n = T::from_usize_lossy(pooled.len());
    let correction = T::one() - tie_term(&pooled) / (n * n * n - n);
    if correction <= T::zero() {
        return Ok(KruskalWallis { h: T::zero(), p: 1.0, df });
    }
    let ranks = average_ranks(&pooled);
    let mut offset = 0;
    let mut sum = T::zero();
    for g in groups {
        let r = ranks[offset..offset + g.len()].iter().fold(T::zero(), |a, &b| a + b);
        sum = sum + r * r / T::from_usize_lossy(g.len());
        offset += g.len();
    }
    let h = (T::lit(12.0) / (n * (n + T::one())) * sum - T::lit(3.0) * (n + T::one())) / correction;
    let h = if h < T::zero() { T::zero() } else { h };
    let chi = ChiSquared::new(df as f64).map_err(|_| StatsError::TooFewGroups { needed: 2, got: groups.len() })?;
    Ok(KruskalWallis { h, p: chi.sf(h.as_f64()).clamp(0.0, 1.0), df })
}

fn split_by_label<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<(usize, usize), StatsError> {
    if scores.len() != labels.len() {
        return Err(StatsError::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    check_finite(scores)?;
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(StatsError::SingleClass);
    }
    Ok((pos, neg))
}

/// Area under the ROC curve for `labels == true` as the positive class,
/// via the rank-sum formulation. Ties count one half.
pub fn auc_roc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<T, StatsError> {
    let (pos, neg) = split_by_label(scores, labels)?;
    let ranks = average_ranks(scores);
    let r_pos = ranks.iter().zip(labels).filter(|(_, &l)| l).fold(T::zero(), |a, (&r, _)| a + r);
    let p = T::from_usize_lossy(pos);
    let u = r_pos - p * (p + T::one()) / T::lit(2.0);
    Ok(u / (p * T::from_usize_lossy(neg)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney<T> {
    /// U statistic of the first sample.
    pub u: T,
    /// Two-sided p from the tie-corrected normal approximation.
    pub p: f64,
}

pub fn mann_whitney<T: Scalar>(a: &[T], b: &[T]) -> Result<MannWhitney<T>, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let pooled: Vec<T> = a.iter().chain(b).copied().collect();
    check_finite(&pooled)?;
    let ranks = average_ranks(&pooled);
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let n = na + nb;
    let ra = ranks[..a.len()].iter().fold(T::zero(), |x, &y| x + y);
    let u = ra - na * (na + T::one()) / T::lit(2.0);
    let mu = na * nb / T::lit(2.0);
    let var = na * nb / T::lit(12.0) * ((n + T::one()) - tie_term(&pooled) / (n * (n - T::one())));
    let p = if var <= T::zero() {
        1.0
    } else {
        let z = ((u - mu).abs() / var.sqrt()).as_f64();
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * std.sf(z)).clamp(0.0, 1.0)
    };
    Ok(MannWhitney { u, p })
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the
/// empirical CDFs.
pub fn ks_statistic<T: Scalar>(a: &[T], b: &[T]) -> Result<T, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let sort = |xs: &[T]| {
        let mut v = xs.to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
        v
    };
    let (a, b) = (sort(a), sort(b));
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        let gap = (T::from_usize_lossy(i) / na - T::from_usize_lossy(j) / nb).abs();
        if gap > d {
            d = gap;
        }
    }
    Ok(d)
}

/// Kendall τ-b between two paired score vectors. `None` when either side is
/// constant, where τ is undefined.
pub fn kendall_tau<T: Scalar>(a: &[T], b: &[T]) -> Result<Option<T>, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { left: a.len(), right: b.len() });
    }
    check_finite(a)?;
    check_finite(b)?;
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let da = a[i].partial_cmp(&a[j]).unwrap_or(Ordering::Equal);
            let db = b[i].partial_cmp(&b[j]).unwrap_or(Ordering::Equal);
            match (da, db) {
                (Ordering::Equal, Ordering::Equal) => {
                    ties_a += 1;
                    ties_b += 1;
                }
                (Ordering::Equal, _) => ties_a += 1,
                (_, Ordering::Equal) => ties_b += 1,
                (x, y) if x == y => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n = (a.len() as u64) * (a.len().saturating_sub(1) as u64) / 2;
    let denom = ((n - ties_a) as f64) * ((n - ties_b) as f64);
    if denom <= 0.0 {
        return Ok(None);
    }
    let tau = (concordant as f64 - discordant as f64) / denom.sqrt();
    Ok(Some(T::lit(tau.clamp(-1.0, 1.0))))
}
