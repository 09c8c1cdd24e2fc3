use crate::assignment::{assignment_cost, hungarian};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::kdtree::KdTree;
use super::points::PointSet;

pub const EMD_MAX_POINTS: usize = 1024;

/// Point-set distance used by [`one_nna`](super::one_nna) and
/// [`coverage`](super::coverage).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeDistance {
    /// Squared-distance Chamfer.
    Chamfer,
    /// Chamfer on unsquared nearest-neighbour distances.
    ChamferRoot,
    Emd,
}

impl ShapeDistance {
    pub fn name(self) -> &'static str {
        match self {
            ShapeDistance::Chamfer => "chamfer",
            ShapeDistance::ChamferRoot => "chamfer-root",
            ShapeDistance::Emd => "emd",
        }
    }

    pub fn eval<T: Real>(self, a: &PointSet<T>, b: &PointSet<T>) -> Result<T> {
        match self {
            ShapeDistance::Chamfer => Ok(chamfer(a, b)),
            ShapeDistance::ChamferRoot => Ok(chamfer_root(a, b)),
            ShapeDistance::Emd => emd(a, b),
        }
    }
}

fn directed<T: Real>(from: &PointSet<T>, to: &KdTree<T>, root: bool) -> T {
    let sum: T = from
        .points()
        .iter()
        .map(|&p| {
            let d = to.nearest_squared(p);
            if root {
                d.sqrt()
            } else {
                d
            }
        })
        .sum();
    sum / T::from_usize_lossy(from.len())
}

fn chamfer_with<T: Real>(a: &PointSet<T>, b: &PointSet<T>, root: bool) -> T {
    let (ta, tb) = (KdTree::new(a.points()), KdTree::new(b.points()));
    directed(a, &tb, root) + directed(b, &ta, root)
}

/// `mean_a min_b ‖a − b‖² + mean_b min_a ‖a − b‖²`.
pub fn chamfer<T: Real>(a: &PointSet<T>, b: &PointSet<T>) -> T {
    chamfer_with(a, b, false)
}

/// As [`chamfer`] with unsquared distances.
pub fn chamfer_root<T: Real>(a: &PointSet<T>, b: &PointSet<T>) -> T {
    chamfer_with(a, b, true)
}

/// Optimal perfect matching under Euclidean costs, divided by `n`.
pub fn emd<T: Real>(a: &PointSet<T>, b: &PointSet<T>) -> Result<T> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!("emd needs equal sizes, got {n} and {}", b.len())));
    }
    if n > EMD_MAX_POINTS {
        return Err(Error::SizeGuard {
            what: "emd points",
            size: n,
            limit: EMD_MAX_POINTS,
        });
    }
    let mut cost = Vec::with_capacity(n * n);
    for p in a.points() {
        for q in b.points() {
            cost.push(p.dist_squared(*q).sqrt());
        }
    }
    let assignment = hungarian(n, &cost)?;
    Ok(assignment_cost(n, &cost, &assignment) / T::from_usize_lossy(n))
}
