//! Static 3-d tree for nearest-neighbour distances.
//!
//! Distances are computed with [`Vec3::dist_squared`], the same expression a brute-force
//! scan uses. Pruning compares the squared offset to the splitting plane against the
//! best distance; rounding is monotone, so no subtree that could hold a strictly closer
//! point is skipped and results equal the brute-force minimum bit for bit.

use crate::geom::Vec3;
use crate::scalar::{cmp_finite, Real};

const LEAF: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, point: usize, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct KdTree<T> {
    points: Vec<Vec3<T>>,
    nodes: Vec<Node>,
}

impl<T: Real> KdTree<T> {
    pub fn new(points: &[Vec3<T>]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &mut self.points[start..end];
        let spread = |a: usize| {
            let (lo, hi) = slice.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
                (lo.min(p.get(a)), hi.max(p.get(a)))
            });
            hi - lo
        };
        let axis = (0..3).max_by(|&a, &b| cmp_finite(spread(a), spread(b))).unwrap_or(0);
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |p, q| cmp_finite(p.get(axis), q.get(axis)));
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, start + mid);
        let right = self.build(start + mid + 1, end);
        self.nodes[id] = Node::Split {
            axis,
            point: start + mid,
            left,
            right,
        };
        id
    }

    /// Smallest squared distance from `q` to the tree's points (`+inf` if empty).
    pub fn nearest_squared(&self, q: Vec3<T>) -> T {
        let mut best = T::infinity();
        if !self.nodes.is_empty() {
            self.search(0, q, &mut best);
        }
        best
    }

    fn search(&self, node: usize, q: Vec3<T>, best: &mut T) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for p in &self.points[start..end] {
                    *best = best.min(q.dist_squared(*p));
                }
            }
            Node::Split { axis, point, left, right } => {
                let p = self.points[point];
                *best = best.min(q.dist_squared(p));
                let d = q.get(axis) - p.get(axis);
                let (near, far) = if d < T::zero() { (left, right) } else { (right, left) };
                self.search(near, q, best);
                if d * d < *best {
                    self.search(far, q, best);
                }
            }
        }
    }
}
