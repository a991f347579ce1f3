//! Benjamini-Hochberg false-discovery-rate adjustment.

use std::cmp::Ordering;

use super::StatsError;
use crate::scalar::Scalar;

/// Step-up BH q-values, returned in input order. `qᵢ = min_{j ≥ i} p₍ⱼ₎·m/j`,
/// capped at 1.
pub fn benjamini_hochberg<T: Scalar>(p_values: &[T]) -> Result<Vec<T>, StatsError> {
    if let Some(p) = p_values.iter().find(|p| !(**p >= T::zero() && **p <= T::one())) {
        return Err(StatsError::PValueOutOfRange(p.as_f64()));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap_or(Ordering::Equal));
    let mut q = vec![T::zero(); m];
    let mut running = T::one();
    for (rank, &i) in order.iter().enumerate().rev() {
        let adj = p_values[i] * T::from_usize_lossy(m) / T::from_usize_lossy(rank + 1);
        running = running.min(adj);
        q[i] = running;
    }
    Ok(q)
}

/// Whether `q` is significant at false-discovery rate `fdr`.
pub fn significant<T: Scalar>(q: T, fdr: T) -> bool {
    q <= fdr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(benjamini_hochberg(&[0.04]).unwrap(), vec![0.04]);
        assert_eq!(benjamini_hochberg(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0; 3]);
        let q = benjamini_hochberg(&[0.01f64, 0.04, 0.03]).unwrap();
        assert!((q[0] - 0.03).abs() < 1e-12 && (q[1] - 0.04).abs() < 1e-12 && (q[2] - 0.04).abs() < 1e-12);
        assert!(benjamini_hochberg(&[1.5]).is_err());
    }
}
