//! Cubical complexes of volumes, their sublevel filtrations and persistent homology
//! over Z/2.

mod complex;
mod diagram;
mod naive;
mod reduce;

pub use complex::{build_filtration, CellId, Cube, FilteredCubicalComplex, MAX_CELLS};
pub use diagram::{DiagramTable, PersistenceDiagramSet, PersistencePair, TSV_MAGIC};
pub use naive::{compute_persistence_naive, NAIVE_MAX_CELLS};
pub use reduce::{compute_persistence, compute_persistence_with, Fault, ReductionOptions, ReductionStats};

use crate::scalar::Real;

/// Betti numbers `(b0, b1, b2)` at threshold `t`.
pub fn betti_at<T: Real>(pds: &PersistenceDiagramSet<T>, t: T) -> [usize; 3] {
    pds.betti_at(t)
}

/// Euler characteristic of the sublevel complex at `t`.
pub fn euler_characteristic_at<T: Real>(cx: &FilteredCubicalComplex<T>, t: T) -> i64 {
    cx.euler_characteristic_at(t)
}
