//! Persistence of the cubical sublevel filtration.
//!
//! Cells are totally ordered by `(value, dim, doubled-lattice id)`; the id order is
//! lexicographic in the doubled coordinates `(z, y, x)`. Since the pairing only ever
//! compares cells of equal dimension, each dimension is ranked separately.
//!
//! Columns are reduced from the top dimension down (twist). A voxel column with pivot
//! square `s` makes `s` a creator, so the column of `s` is never reduced (clearing);
//! the same happens for edges that are pivots of square columns. Dimension 0 is
//! paired by union-find with the elder rule, which yields the same pairs as reducing
//! the edge columns.

use crate::scalar::{cmp_finite, Real};

use super::complex::{CellId, FilteredCubicalComplex};
use super::diagram::{PersistenceDiagramSet, PersistencePair};

const NONE: u32 = u32::MAX;

/// Deliberate defects used to check that the oracle comparison catches them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Clear square columns killed by voxels without recording the pair.
    DropClearedPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionOptions {
    /// Skip columns known to reduce to zero. Off reduces every column; the output is
    /// identical either way.
    pub clearing: bool,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions {
            clearing: true,
            fault: None,
        }
    }
}

/// Counters from one run, for diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReductionStats {
    pub columns_reduced: usize,
    pub columns_cleared: usize,
    pub column_additions: usize,
}

/// Complete persistence (all dimensions, zero-persistence pairs included).
pub fn compute_persistence<T: Real>(cx: &FilteredCubicalComplex<T>) -> PersistenceDiagramSet<T> {
    compute_persistence_with(cx, ReductionOptions::default()).0
}

pub fn compute_persistence_with<T: Real>(
    cx: &FilteredCubicalComplex<T>,
    options: ReductionOptions,
) -> (PersistenceDiagramSet<T>, ReductionStats) {
    let mut stats = ReductionStats::default();
    let mut rank = vec![NONE; cx.cell_count()];
    let order: Vec<Vec<u32>> = (0..4)
        .map(|d| {
            let o = sorted_cells(cx, d);
            for (r, &id) in o.iter().enumerate() {
                rank[id as usize] = r as u32;
            }
            o
        })
        .collect();

    let mut pairs: Vec<PersistencePair<T>> = Vec::new();
    let mut push = |dim: usize, birth: u32, death: Option<u32>| {
        pairs.push(PersistencePair {
            dim,
            birth: cx.value(CellId(birth)),
            death: death.map_or(T::infinity(), |d| cx.value(CellId(d))),
            birth_cell: CellId(birth),
            death_cell: death.map(CellId),
        });
    };

    // Voxels against squares.
    let mut square_killed = vec![false; order[2].len()];
    let voxel_cols = ColumnReducer::run(cx, &rank, &order[3], order[2].len(), None, &mut stats);
    for (vr, &pivot) in voxel_cols.iter().enumerate() {
        let voxel = order[3][vr];
        if pivot == NONE {
            push(3, voxel, None);
        } else {
            square_killed[pivot as usize] = true;
            if options.fault != Some(Fault::DropClearedPairs) {
                push(2, order[2][pivot as usize], Some(voxel));
            }
        }
    }

    // Squares against edges, skipping cleared squares.
    let skip = options.clearing.then_some(square_killed.as_slice());
    let mut edge_killed = vec![false; order[1].len()];
    let square_cols = ColumnReducer::run(cx, &rank, &order[2], order[1].len(), skip, &mut stats);
    for (sr, &pivot) in square_cols.iter().enumerate() {
        let square = order[2][sr];
        if pivot == NONE {
            if !square_killed[sr] {
                push(2, square, None);
            }
        } else if pivot != CLEARED {
            edge_killed[pivot as usize] = true;
            push(1, order[1][pivot as usize], Some(square));
        }
    }

    // Edges against vertices.
    let mut uf = UnionFind::new(order[0].len());
    for (er, &edge) in order[1].iter().enumerate() {
        let mut ends = cx.boundary(CellId(edge)).map(|v| rank[v.0 as usize]);
        let (a, b) = (ends.next().unwrap(), ends.next().unwrap());
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            if !edge_killed[er] {
                push(1, edge, None);
            }
            continue;
        }
        debug_assert!(!edge_killed[er], "negative edge cannot be a square pivot");
        let (elder, younger) = if ra < rb { (ra, rb) } else { (rb, ra) };
        uf.parent[younger as usize] = elder;
        push(0, order[0][younger as usize], Some(edge));
    }
    for v in 0..order[0].len() as u32 {
        if uf.find(v) == v {
            push(0, order[0][v as usize], None);
        }
    }

    let grid = cx.grid();
    (
        PersistenceDiagramSet::new(pairs, grid.dims(), (grid.min_value(), grid.max_value())),
        stats,
    )
}

/// Cell ids of one dimension sorted by `(value, id)`.
fn sorted_cells<T: Real>(cx: &FilteredCubicalComplex<T>, dim: usize) -> Vec<u32> {
    let mut keyed: Vec<(T, u32)> = cx.cells_of_dim(dim).map(|c| (cx.value(c), c.0)).collect();
    keyed.sort_unstable_by(|a, b| cmp_finite(a.0, b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, id)| id).collect()
}

const CLEARED: u32 = u32::MAX - 1;

struct ColumnReducer;

impl ColumnReducer {
    /// Reduces the boundary columns of `cols` (ids in rank order) over faces with
    /// `n_faces` ranks. Returns per column the pivot face rank, `NONE` for a zero
    /// column or `CLEARED` for a skipped one.
    fn run<T: Real>(
        cx: &FilteredCubicalComplex<T>,
        rank: &[u32],
        cols: &[u32],
        n_faces: usize,
        skip: Option<&[bool]>,
        stats: &mut ReductionStats,
    ) -> Vec<u32> {
        let mut reduced: Vec<Option<Box<[u32]>>> = vec![None; n_faces];
        let mut pivots = Vec::with_capacity(cols.len());
        let mut col: Vec<u32> = Vec::with_capacity(16);
        let mut scratch: Vec<u32> = Vec::with_capacity(16);
        for (cr, &id) in cols.iter().enumerate() {
            if skip.is_some_and(|s| s[cr]) {
                stats.columns_cleared += 1;
                pivots.push(CLEARED);
                continue;
            }
            stats.columns_reduced += 1;
            col.clear();
            col.extend(cx.boundary(CellId(id)).map(|f| rank[f.0 as usize]));
            col.sort_unstable();
            while let Some(&p) = col.last() {
                match &reduced[p as usize] {
                    Some(other) => {
                        stats.column_additions += 1;
                        symmetric_difference(&col, other, &mut scratch);
                        std::mem::swap(&mut col, &mut scratch);
                    }
                    None => break,
                }
            }
            match col.last() {
                Some(&p) => {
                    reduced[p as usize] = Some(col.as_slice().into());
                    pivots.push(p);
                }
                None => pivots.push(NONE),
            }
        }
        pivots
    }
}

/// Sorted symmetric difference (addition over Z/2).
fn symmetric_difference(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Union-find over vertex ranks; each root is the oldest vertex of its component.
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_difference_merges() {
        let mut out = Vec::new();
        symmetric_difference(&[1, 3, 5, 9], &[2, 3, 9, 10], &mut out);
        assert_eq!(out, vec![1, 2, 5, 10]);
        symmetric_difference(&[], &[4], &mut out);
        assert_eq!(out, vec![4]);
    }

    #[test]
    fn union_find_keeps_oldest_root() {
        let mut uf = UnionFind::new(4);
        uf.parent[3] = 1;
        uf.parent[1] = 0;
        assert_eq!(uf.find(3), 0);
        assert_eq!(uf.parent[3], 0);
    }
}
