//! Textbook left-to-right column reduction over an explicitly assembled boundary
//! matrix. Shares nothing with the fast path except the grid values and the cell-id
//! scheme used to report pairs.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::complex::{CellId, FilteredCubicalComplex};
use super::diagram::{PersistenceDiagramSet, PersistencePair};

/// Size guard on the total cell count.
pub const NAIVE_MAX_CELLS: usize = 100_000;

struct Cell<T> {
    anchor: [usize; 3],
    mask: u8,
    dim: usize,
    value: T,
    /// Doubled-lattice coordinates, compared lexicographically as `(z, y, x)`.
    doubled: [usize; 3],
}

pub fn compute_persistence_naive<T: Real>(cx: &FilteredCubicalComplex<T>) -> Result<PersistenceDiagramSet<T>> {
    let grid = cx.grid();
    let dims = grid.dims();
    let total: usize = dims.iter().map(|&d| 2 * d - 1).product();
    if total > NAIVE_MAX_CELLS {
        return Err(Error::SizeGuard {
            what: "naive reduction cell count",
            size: total,
            limit: NAIVE_MAX_CELLS,
        });
    }

    let mut cells = Vec::with_capacity(total);
    for az in 0..dims[2] {
        for ay in 0..dims[1] {
            for ax in 0..dims[0] {
                let anchor = [ax, ay, az];
                for mask in 0u8..8 {
                    let ext = [(mask & 1) as usize, ((mask >> 1) & 1) as usize, ((mask >> 2) & 1) as usize];
                    if (0..3).any(|a| anchor[a] + ext[a] >= dims[a]) {
                        continue;
                    }
                    let mut value = T::neg_infinity();
                    for dz in 0..=ext[2] {
                        for dy in 0..=ext[1] {
                            for dx in 0..=ext[0] {
                                value = value.max(grid.get(ax + dx, ay + dy, az + dz));
                            }
                        }
                    }
                    cells.push(Cell {
                        anchor,
                        mask,
                        dim: mask.count_ones() as usize,
                        value,
                        doubled: [2 * ax + ext[0], 2 * ay + ext[1], 2 * az + ext[2]],
                    });
                }
            }
        }
    }
    cells.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .expect("finite values")
            .then(a.dim.cmp(&b.dim))
            .then(a.doubled[2].cmp(&b.doubled[2]))
            .then(a.doubled[1].cmp(&b.doubled[1]))
            .then(a.doubled[0].cmp(&b.doubled[0]))
    });

    let index: HashMap<([usize; 3], u8), usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.anchor, c.mask), i))
        .collect();

    let mut columns: Vec<Vec<usize>> = cells
        .iter()
        .map(|c| {
            let mut col = Vec::new();
            for a in 0..3 {
                let bit = 1u8 << a;
                if c.mask & bit == 0 {
                    continue;
                }
                let lower = c.anchor;
                let mut upper = c.anchor;
                upper[a] += 1;
                col.push(index[&(lower, c.mask & !bit)]);
                col.push(index[&(upper, c.mask & !bit)]);
            }
            col.sort_unstable();
            col
        })
        .collect();

    let mut low_owner: HashMap<usize, usize> = HashMap::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            let Some(&k) = low_owner.get(&low) else { break };
            let other = columns[k].clone();
            let col = &mut columns[j];
            for r in other {
                match col.binary_search(&r) {
                    Ok(pos) => {
                        col.remove(pos);
                    }
                    Err(pos) => col.insert(pos, r),
                }
            }
        }
        if let Some(&low) = columns[j].last() {
            low_owner.insert(low, j);
        }
    }

    let id = |c: &Cell<T>| {
        let k = [2 * dims[0] - 1, 2 * dims[1] - 1];
        CellId((c.doubled[0] + k[0] * (c.doubled[1] + k[1] * c.doubled[2])) as u32)
    };
    let mut pairs = Vec::new();
    let mut is_birth_of_pair = vec![false; cells.len()];
    for (&low, &j) in &low_owner {
        is_birth_of_pair[low] = true;
        pairs.push(PersistencePair {
            dim: cells[low].dim,
            birth: cells[low].value,
            death: cells[j].value,
            birth_cell: id(&cells[low]),
            death_cell: Some(id(&cells[j])),
        });
    }
    for (j, col) in columns.iter().enumerate() {
        if col.is_empty() && !is_birth_of_pair[j] {
            pairs.push(PersistencePair {
                dim: cells[j].dim,
                birth: cells[j].value,
                death: T::infinity(),
                birth_cell: id(&cells[j]),
                death_cell: None,
            });
        }
    }
    Ok(PersistenceDiagramSet::new(pairs, dims, (grid.min_value(), grid.max_value())))
}
