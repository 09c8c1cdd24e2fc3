use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scalar::Real;
use crate::vgrd::RawGrid;

use super::bounds::Aabb;
use super::scene::SdfScene;

/// Dense scalar raster over an axis-aligned box, x varying fastest.
///
/// Sample `(i, j, k)` sits at `min + (max - min) * (i, j, k) / (dims - 1)`, so the
/// lattice includes both bounding faces.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid<T> {
    dims: [usize; 3],
    bounds: Aabb<T>,
    values: Vec<T>,
    kind: FieldKind,
}

/// What the values of a grid mean. Not stored in the `VGRD` container; loaded grids are
/// [`FieldKind::Sdf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldKind {
    #[default]
    Sdf,
    /// `{0, 1}` values, 1 = occupied.
    Occupancy,
}

/// The default sampling box, `[-0.5, 0.5]^3`.
pub fn default_bounds<T: Real>() -> Aabb<T> {
    Aabb::cube(T::lit(-0.5), T::lit(0.5))
}

impl<T: Real> VolumeGrid<T> {
    pub fn new(dims: [usize; 3], bounds: Aabb<T>, values: Vec<T>) -> Result<Self> {
        check_dims(dims)?;
        check_bounds(&bounds)?;
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n {
            return Err(Error::InvalidGrid(format!(
                "{} values for dims {dims:?} (expected {n})",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i}")));
        }
        Ok(VolumeGrid {
            dims,
            bounds,
            values,
            kind: FieldKind::Sdf,
        })
    }

    pub fn from_fn(dims: [usize; 3], bounds: Aabb<T>, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        check_dims(dims)?;
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    values.push(f(i, j, k));
                }
            }
        }
        Self::new(dims, bounds, values)
    }

    pub fn constant(dims: [usize; 3], value: T) -> Result<Self> {
        Self::from_fn(dims, default_bounds(), |_, _, _| value)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn bounds(&self) -> &Aabb<T> {
        &self.bounds
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.index(i, j, k)]
    }

    /// Lattice spacing per axis.
    pub fn spacing(&self) -> Vec3<T> {
        let size = self.bounds.size();
        Vec3::new(
            size.x / T::from_usize_lossy(self.dims[0] - 1),
            size.y / T::from_usize_lossy(self.dims[1] - 1),
            size.z / T::from_usize_lossy(self.dims[2] - 1),
        )
    }

    /// World position of lattice point `(i, j, k)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3<T> {
        let axis = |a: usize, n: usize| {
            let lo = self.bounds.min.get(a);
            let hi = self.bounds.max.get(a);
            lo + (hi - lo) * (T::from_usize_lossy(n) / T::from_usize_lossy(self.dims[a] - 1))
        };
        Vec3::new(axis(0, i), axis(1, j), axis(2, k))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Applies `f` to every value, keeping dims, bounds and kind.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let mut g = Self::new(self.dims, self.bounds, self.values.iter().map(|&v| f(v)).collect())?;
        g.kind = self.kind;
        Ok(g)
    }

    /// Converts to the on-disk container (values narrowed to `f32`).
    pub fn to_raw(&self) -> RawGrid {
        let b = |v: T| v.to_f32().unwrap_or(f32::NAN);
        let (lo, hi) = (self.bounds.min, self.bounds.max);
        RawGrid {
            dims: self.dims.map(|d| d as u32),
            bounds: [b(lo.x), b(lo.y), b(lo.z), b(hi.x), b(hi.y), b(hi.z)],
            values: self.values.iter().map(|&v| b(v)).collect(),
        }
    }

    pub fn from_raw(raw: &RawGrid) -> Result<Self> {
        let t = |v: f32| T::from_f32(v).expect("f32 converts");
        let bd = raw.bounds;
        let bounds = Aabb::new(
            Vec3::new(t(bd[0]), t(bd[1]), t(bd[2])),
            Vec3::new(t(bd[3]), t(bd[4]), t(bd[5])),
        );
        Self::new(
            raw.dims.map(|d| d as usize),
            bounds,
            raw.values.iter().map(|&v| t(v)).collect(),
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_raw().to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_raw(&RawGrid::from_bytes(bytes)?)
    }
}

fn check_dims(dims: [usize; 3]) -> Result<()> {
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidGrid(format!("every axis needs >= 2 samples, got {dims:?}")));
    }
    if dims.iter().any(|&d| d > u32::MAX as usize) {
        return Err(Error::InvalidGrid("axis too large".into()));
    }
    Ok(())
}

fn check_bounds<T: Real>(b: &Aabb<T>) -> Result<()> {
    let ok = (0..3).all(|a| {
        let (lo, hi) = (b.min.get(a), b.max.get(a));
        lo.is_finite() && hi.is_finite() && lo < hi
    });
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGrid("bounds must be finite with min < max".into()))
    }
}

/// Samples the scene's signed distance at every lattice point.
pub fn rasterize<T: Real>(scene: &SdfScene<T>, dims: [usize; 3], bounds: Aabb<T>) -> Result<VolumeGrid<T>> {
    check_dims(dims)?;
    check_bounds(&bounds)?;
    let frac = |a: usize| -> Vec<T> {
        let lo = bounds.min.get(a);
        let hi = bounds.max.get(a);
        let last = T::from_usize_lossy(dims[a] - 1);
        (0..dims[a])
            .map(|n| lo + (hi - lo) * (T::from_usize_lossy(n) / last))
            .collect()
    };
    let (xs, ys, zs) = (frac(0), frac(1), frac(2));
    let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for &z in &zs {
        for &y in &ys {
            for &x in &xs {
                values.push(scene.eval(Vec3::new(x, y, z)));
            }
        }
    }
    VolumeGrid::new(dims, bounds, values)
}

/// Binary occupancy: 1 where the SDF is `<= 0`, else 0. An occupancy grid is returned
/// unchanged.
pub fn occupancy<T: Real>(grid: &VolumeGrid<T>) -> VolumeGrid<T> {
    if grid.kind == FieldKind::Occupancy {
        return grid.clone();
    }
    let mut g = grid
        .map(|v| if v <= T::zero() { T::one() } else { T::zero() })
        .expect("occupancy values are finite");
    g.kind = FieldKind::Occupancy;
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_values_of_a_two_point_grid() {
        let ball = SdfScene::ball(Vec3::zero(), 0.5).unwrap();
        let g = rasterize(&ball, [2, 2, 2], Aabb::cube(0.0, 1.0)).unwrap();
        assert_eq!(g.get(0, 0, 0), -0.5);
        assert!((g.get(1, 1, 1) - (3f64.sqrt() - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn covering_ball_is_all_negative() {
        let ball = SdfScene::ball(Vec3::zero(), 2.0).unwrap();
        let g = rasterize(&ball, [5, 4, 3], default_bounds()).unwrap();
        assert!(g.values().iter().all(|&v: &f64| v < 0.0));
        assert!(occupancy(&g).values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn occupancy_counts_boundary_inside() {
        let g = VolumeGrid::new([2, 2, 2], default_bounds(), vec![0.0, 1.0, -1.0, 2.0, 0.0, 0.0, 3.0, 4.0]).unwrap();
        let o = occupancy(&g);
        assert_eq!(o.values(), &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(occupancy(&o), o);
    }

    #[test]
    fn lattice_includes_both_faces() {
        let g = VolumeGrid::<f64>::constant([128, 2, 2], 0.0).unwrap();
        assert_eq!(g.point(0, 0, 0).x, -0.5);
        assert_eq!(g.point(127, 1, 1), Vec3::splat(0.5));
        assert!((g.spacing().x - 1.0 / 127.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_grids() {
        assert!(VolumeGrid::<f64>::constant([1, 2, 2], 0.0).is_err());
        assert!(VolumeGrid::new([2, 2, 2], default_bounds(), vec![0.0f64; 7]).is_err());
        assert!(VolumeGrid::new([2, 2, 2], default_bounds(), vec![f64::NAN; 8]).is_err());
        assert!(VolumeGrid::new([2, 2, 2], Aabb::cube(1.0, 0.0), vec![0.0f64; 8]).is_err());
    }

    #[test]
    fn vgrd_round_trip_is_bit_exact_for_f32() {
        let g = VolumeGrid::<f32>::from_fn([3, 2, 2], default_bounds(), |i, j, k| (i * 7 + j * 3 + k) as f32 * 0.1 - 0.3).unwrap();
        let back = VolumeGrid::<f32>::from_bytes(&g.to_bytes()).unwrap();
        assert_eq!(back, g);
    }
}
