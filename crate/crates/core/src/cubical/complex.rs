use crate::error::{Error, Result};
use crate::field::VolumeGrid;
use crate::scalar::Real;

/// Identifier of a cell: its linear index in the doubled lattice of extent
/// `(2nx - 1) x (2ny - 1) x (2nz - 1)`, x fastest. A doubled coordinate is odd along
/// the axes the cell extends in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

/// Elementary cube `I1 x I2 x I3`: lowest lattice vertex plus the axes with a
/// non-degenerate interval (bit `a` set for axis `a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    pub anchor: [usize; 3],
    pub extent_mask: u8,
}

impl Cube {
    pub fn dim(&self) -> usize {
        self.extent_mask.count_ones() as usize
    }
}

/// Largest number of cells addressable by a `u32` id.
pub const MAX_CELLS: usize = u32::MAX as usize;

/// Sublevel filtration of the cubical complex spanned by a volume's lattice.
///
/// Values live on vertices; every cell takes the maximum of its vertices, so a face
/// never enters after its cofaces. Cells are enumerated implicitly.
#[derive(Debug, Clone)]
pub struct FilteredCubicalComplex<T> {
    grid: VolumeGrid<T>,
    doubled: [usize; 3],
}

impl<T: Real> FilteredCubicalComplex<T> {
    pub fn new(grid: VolumeGrid<T>) -> Result<Self> {
        let dims = grid.dims();
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidGrid(format!("every axis needs >= 2 samples, got {dims:?}")));
        }
        let doubled = dims.map(|d| 2 * d - 1);
        let total = doubled.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(t) if t < MAX_CELLS => Ok(FilteredCubicalComplex { grid, doubled }),
            _ => Err(Error::SizeGuard {
                what: "cell count",
                size: total.unwrap_or(usize::MAX),
                limit: MAX_CELLS,
            }),
        }
    }

    pub fn grid(&self) -> &VolumeGrid<T> {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims()
    }

    /// Extent of the doubled lattice.
    pub fn doubled_dims(&self) -> [usize; 3] {
        self.doubled
    }

    pub fn cell_count(&self) -> usize {
        self.doubled.iter().product()
    }

    /// Number of cells of each dimension 0..=3.
    pub fn cell_counts(&self) -> [usize; 4] {
        let [nx, ny, nz] = self.dims();
        let (ex, ey, ez) = (nx - 1, ny - 1, nz - 1);
        [
            nx * ny * nz,
            ex * ny * nz + nx * ey * nz + nx * ny * ez,
            ex * ey * nz + ex * ny * ez + nx * ey * ez,
            ex * ey * ez,
        ]
    }

    #[inline]
    pub fn coords(&self, id: CellId) -> [usize; 3] {
        let i = id.0 as usize;
        let [kx, ky, _] = self.doubled;
        [i % kx, (i / kx) % ky, i / (kx * ky)]
    }

    #[inline]
    pub fn id_of(&self, c: [usize; 3]) -> CellId {
        let [kx, ky, _] = self.doubled;
        CellId((c[0] + kx * (c[1] + ky * c[2])) as u32)
    }

    #[inline]
    pub fn dim(&self, id: CellId) -> usize {
        let c = self.coords(id);
        (c[0] & 1) + (c[1] & 1) + (c[2] & 1)
    }

    pub fn cube(&self, id: CellId) -> Cube {
        let c = self.coords(id);
        Cube {
            anchor: c.map(|v| v >> 1),
            extent_mask: ((c[0] & 1) | ((c[1] & 1) << 1) | ((c[2] & 1) << 2)) as u8,
        }
    }

    pub fn id_of_cube(&self, cube: Cube) -> Option<CellId> {
        let dims = self.dims();
        let mut c = [0usize; 3];
        for a in 0..3 {
            let bit = ((cube.extent_mask >> a) & 1) as usize;
            if cube.anchor[a] + bit >= dims[a] {
                return None;
            }
            c[a] = 2 * cube.anchor[a] + bit;
        }
        Some(self.id_of(c))
    }

    /// Filtration value `S(cell)`: the maximum over the cell's vertices.
    #[inline]
    pub fn value(&self, id: CellId) -> T {
        self.value_at(self.coords(id))
    }

    #[inline]
    pub(crate) fn value_at(&self, c: [usize; 3]) -> T {
        let [x, y, z] = c;
        let xs = [x >> 1, (x + 1) >> 1];
        let ys = [y >> 1, (y + 1) >> 1];
        let zs = [z >> 1, (z + 1) >> 1];
        let (nx, nxy) = {
            let d = self.grid.dims();
            (d[0], d[0] * d[1])
        };
        let v = self.grid.values();
        let mut m = T::neg_infinity();
        for &k in &zs[..1 + (z & 1)] {
            for &j in &ys[..1 + (y & 1)] {
                for &i in &xs[..1 + (x & 1)] {
                    m = m.max(v[i + nx * j + nxy * k]);
                }
            }
        }
        m
    }

    /// Codimension-1 faces, two per extended axis.
    pub fn boundary(&self, id: CellId) -> impl Iterator<Item = CellId> + '_ {
        let c = self.coords(id);
        let [kx, ky, _] = self.doubled;
        let strides = [1u32, kx as u32, (kx * ky) as u32];
        (0..3)
            .filter(move |&a| c[a] & 1 == 1)
            .flat_map(move |a| [CellId(id.0 - strides[a]), CellId(id.0 + strides[a])])
    }

    /// Vertices (lattice points) of the cell as `(i, j, k)`.
    pub fn vertices(&self, id: CellId) -> Vec<[usize; 3]> {
        let c = self.coords(id);
        let mut out = Vec::with_capacity(8);
        for dz in 0..=(c[2] & 1) {
            for dy in 0..=(c[1] & 1) {
                for dx in 0..=(c[0] & 1) {
                    out.push([(c[0] >> 1) + dx, (c[1] >> 1) + dy, (c[2] >> 1) + dz]);
                }
            }
        }
        out
    }

    /// All cells of dimension `dim`, in id order.
    pub fn cells_of_dim(&self, dim: usize) -> impl Iterator<Item = CellId> + '_ {
        let [kx, ky, kz] = self.doubled;
        (0..kz).flat_map(move |z| {
            (0..ky).flat_map(move |y| {
                let base = (z & 1) + (y & 1);
                let want = dim.checked_sub(base).filter(|&r| r <= 1);
                let start = want.unwrap_or(0);
                let range = if want.is_some() { start..kx } else { kx..kx };
                range
                    .step_by(2)
                    .map(move |x| self.id_of([x, y, z]))
            })
        })
    }

    /// Euler characteristic of the sublevel complex `{cell : S(cell) <= t}`.
    pub fn euler_characteristic_at(&self, t: T) -> i64 {
        let [kx, ky, kz] = self.doubled;
        let mut chi = 0i64;
        for z in 0..kz {
            for y in 0..ky {
                for x in 0..kx {
                    let c = [x, y, z];
                    if self.value_at(c) <= t {
                        let d = (x & 1) + (y & 1) + (z & 1);
                        chi += if d % 2 == 0 { 1 } else { -1 };
                    }
                }
            }
        }
        chi
    }
}

/// Wraps a volume in its filtered cubical complex.
pub fn build_filtration<T: Real>(grid: VolumeGrid<T>) -> Result<FilteredCubicalComplex<T>> {
    FilteredCubicalComplex::new(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::default_bounds;

    fn grid(dims: [usize; 3], f: impl FnMut(usize, usize, usize) -> f64) -> VolumeGrid<f64> {
        VolumeGrid::from_fn(dims, default_bounds(), f).unwrap()
    }

    #[test]
    fn two_cube_counts_and_top_value() {
        let g = grid([2, 2, 2], |i, j, k| (i + 2 * j + 4 * k) as f64);
        let cx = build_filtration(g).unwrap();
        assert_eq!(cx.cell_counts(), [8, 12, 6, 1]);
        assert_eq!(cx.cell_count(), 27);
        let voxel: Vec<_> = cx.cells_of_dim(3).collect();
        assert_eq!(voxel.len(), 1);
        assert_eq!(cx.value(voxel[0]), 7.0);
    }

    #[test]
    fn enumeration_matches_counts() {
        let cx = build_filtration(grid([3, 4, 5], |_, _, _| 0.0)).unwrap();
        let counts = cx.cell_counts();
        for (d, &count) in counts.iter().enumerate() {
            let cells: Vec<_> = cx.cells_of_dim(d).collect();
            assert_eq!(cells.len(), count, "dim {d}");
            assert!(cells.iter().all(|&c| cx.dim(c) == d));
        }
        assert_eq!(counts.iter().sum::<usize>(), cx.cell_count());
    }

    #[test]
    fn cube_id_round_trip() {
        let cx = build_filtration(grid([3, 3, 2], |_, _, _| 0.0)).unwrap();
        for i in 0..cx.cell_count() as u32 {
            let id = CellId(i);
            let cube = cx.cube(id);
            assert_eq!(cube.dim(), cx.dim(id));
            assert_eq!(cx.id_of_cube(cube), Some(id));
        }
        let outside = Cube { anchor: [2, 0, 0], extent_mask: 1 };
        assert_eq!(cx.id_of_cube(outside), None);
    }

    #[test]
    fn unique_minimum_vertex_is_unique_minimum_cell() {
        let g = grid([4, 4, 4], |i, j, k| if (i, j, k) == (1, 2, 3) { -5.0 } else { (i * j + k) as f64 });
        let cx = build_filtration(g).unwrap();
        let min = (0..cx.cell_count() as u32).map(|i| cx.value(CellId(i))).fold(f64::INFINITY, f64::min);
        let at_min: Vec<_> = (0..cx.cell_count() as u32).filter(|&i| cx.value(CellId(i)) == min).collect();
        assert_eq!(min, -5.0);
        assert_eq!(at_min.len(), 1);
        assert_eq!(cx.coords(CellId(at_min[0])), [2, 4, 6]);
    }

    #[test]
    fn boundary_faces_have_lower_dim() {
        let cx = build_filtration(grid([3, 3, 3], |i, j, k| (i * 9 + j * 3 + k) as f64)).unwrap();
        for i in 0..cx.cell_count() as u32 {
            let id = CellId(i);
            let faces: Vec<_> = cx.boundary(id).collect();
            assert_eq!(faces.len(), 2 * cx.dim(id));
            for f in faces {
                assert_eq!(cx.dim(f) + 1, cx.dim(id));
                assert!(cx.value(f) <= cx.value(id));
            }
        }
    }

    #[test]
    fn euler_characteristic_of_full_box_is_one() {
        let cx = build_filtration(grid([4, 3, 5], |i, j, k| (i + j + k) as f64)).unwrap();
        assert_eq!(cx.euler_characteristic_at(100.0), 1);
        assert_eq!(cx.euler_characteristic_at(-1.0), 0);
    }
}
