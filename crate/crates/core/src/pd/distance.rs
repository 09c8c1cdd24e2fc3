//! Matching distances between diagrams given as `(birth, death)` pairs, with the
//! diagonal available to every point and the sup-norm as ground metric.

use crate::assignment::{assignment_cost, bottleneck_assignment, hungarian};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const BOTTLENECK_MAX_POINTS: usize = 256;
pub const WASSERSTEIN_MAX_POINTS: usize = 128;

#[inline]
fn sup_dist<T: Real>(a: (T, T), b: (T, T)) -> T {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Sup-norm distance from `(b, d)` to the diagonal.
#[inline]
pub fn diagonal_distance<T: Real>(a: (T, T)) -> T {
    (a.1 - a.0).abs() * T::lit(0.5)
}

fn check<T: Real>(d: &[(T, T)], limit: usize) -> Result<()> {
    if d.len() > limit {
        return Err(Error::SizeGuard {
            what: "diagram points",
            size: d.len(),
            limit,
        });
    }
    if d.iter().any(|&(b, e)| !b.is_finite() || !e.is_finite()) {
        return Err(Error::InvalidArgument("diagrams must hold finite pairs; cap essential classes first".into()));
    }
    Ok(())
}

/// `(n + m)`-square cost matrix: rows are `a` then diagonal copies, columns are `b`
/// then diagonal copies.
fn augmented_costs<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> (usize, Vec<T>) {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut cost = vec![T::zero(); size * size];
    for r in 0..size {
        for c in 0..size {
            cost[r * size + c] = match (r < n, c < m) {
                (true, true) => sup_dist(a[r], b[c]),
                (true, false) => diagonal_distance(a[r]),
                (false, true) => diagonal_distance(b[c]),
                (false, false) => T::zero(),
            };
        }
    }
    (size, cost)
}

/// Bottleneck distance, exact: binary search over the candidate costs with a
/// perfect-matching test.
pub fn bottleneck_distance<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> Result<T> {
    check(a, BOTTLENECK_MAX_POINTS)?;
    check(b, BOTTLENECK_MAX_POINTS)?;
    let (size, cost) = augmented_costs(a, b);
    bottleneck_assignment(size, &cost)
}

/// 1-Wasserstein distance, exact by Hungarian assignment.
pub fn wasserstein_distance<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> Result<T> {
    check(a, WASSERSTEIN_MAX_POINTS)?;
    check(b, WASSERSTEIN_MAX_POINTS)?;
    let (size, cost) = augmented_costs(a, b);
    let assignment = hungarian(size, &cost)?;
    Ok(assignment_cost(size, &cost, &assignment))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = [(0.0f64, 1.0f64)];
        assert_eq!(bottleneck_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(bottleneck_distance(&a, &[]).unwrap(), 0.5);
        assert!((bottleneck_distance(&a, &[(0.1, 1.1)]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(wasserstein_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(wasserstein_distance(&a, &[]).unwrap(), 0.5);
        assert_eq!(wasserstein_distance::<f64>(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn guards() {
        let big = vec![(0.0, 1.0); 257];
        assert!(matches!(bottleneck_distance(&big, &[]), Err(Error::SizeGuard { .. })));
        assert!(wasserstein_distance(&big[..129], &[]).is_err());
        assert!(bottleneck_distance(&[(0.0, f64::INFINITY)], &[]).is_err());
    }
}
