use crate::error::{Error, Result};
use crate::scalar::Real;

use super::distance::ShapeDistance;
use super::points::{PointSet, ShapeSet};

/// Row-major `n x m` matrix of `dist(a_i, b_j)`.
pub fn cross_distances<T: Real>(a: &[PointSet<T>], b: &[PointSet<T>], dist: ShapeDistance) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(dist.eval(x, y)?);
        }
    }
    Ok(out)
}

/// Index of the smallest entry, lowest index on ties; `skip` is excluded.
fn argmin<T: Real>(row: impl Iterator<Item = T>, skip: Option<usize>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (j, d) in row.enumerate() {
        if Some(j) == skip {
            continue;
        }
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j)
}

/// Leave-one-out 1-nearest-neighbour accuracy over `S_g ∪ S_r` (generated first).
/// 0.5 means the two sets are indistinguishable to the classifier, 1.0 fully separated.
pub fn one_nna<T: Real>(generated: &ShapeSet<T>, reference: &ShapeSet<T>, dist: ShapeDistance) -> Result<T> {
    let (ng, nr) = (generated.len(), reference.len());
    if ng < 2 || nr < 2 {
        return Err(Error::InvalidArgument("1-NNA needs at least two shapes per set".into()));
    }
    let all: Vec<&PointSet<T>> = generated.shapes().iter().chain(reference.shapes()).collect();
    let n = all.len();
    let mut d = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = dist.eval(all[i], all[j])?;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let correct = (0..n)
        .filter(|&i| {
            let nn = argmin(d[i * n..(i + 1) * n].iter().copied(), Some(i)).expect("n >= 4");
            (i < ng) == (nn < ng)
        })
        .count();
    Ok(T::from_usize_lossy(correct) / T::from_usize_lossy(n))
}

/// Fraction of reference shapes that are the nearest reference of some generated shape.
pub fn coverage<T: Real>(generated: &ShapeSet<T>, reference: &ShapeSet<T>, dist: ShapeDistance) -> Result<T> {
    let nr = reference.len();
    let d = cross_distances(generated.shapes(), reference.shapes(), dist)?;
    let mut hit = vec![false; nr];
    for row in d.chunks(nr) {
        if let Some(j) = argmin(row.iter().copied(), None) {
            hit[j] = true;
        }
    }
    let covered = hit.iter().filter(|&&h| h).count();
    Ok(T::from_usize_lossy(covered) / T::from_usize_lossy(nr))
}
