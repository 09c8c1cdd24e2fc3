use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};
use crate::scalar::Real;

use super::scene::SdfScene;

/// Axis-aligned box, `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Aabb { min, max }
    }

    pub fn cube(lo: T, hi: T) -> Self {
        Aabb::new(Vec3::splat(lo), Vec3::splat(hi))
    }

    pub fn size(&self) -> Vec3<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn union(&self, o: &Self) -> Self {
        Aabb::new(self.min.zip(o.min, T::min), self.max.zip(o.max, T::max))
    }

    pub fn intersection(&self, o: &Self) -> Option<Self> {
        let b = Aabb::new(self.min.zip(o.min, T::max), self.max.zip(o.max, T::min));
        (b.min.x <= b.max.x && b.min.y <= b.max.y && b.min.z <= b.max.z).then_some(b)
    }

    fn around(center: Vec3<T>, half: Vec3<T>) -> Self {
        Aabb::new(center - half, center + half)
    }
}

/// World placement `x -> scale * rotation * x + offset` accumulated down the tree.
#[derive(Clone, Copy)]
struct Placement<T> {
    scale: T,
    rotation: Mat3<T>,
    offset: Vec3<T>,
}

impl<T: Real> Placement<T> {
    fn apply(&self, x: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(x) * self.scale + self.offset
    }
}

/// Bounding box of the occupied set (`sdf <= 0`), or `None` when the bound is empty.
///
/// Exact for unions of transformed primitives; intersections and subtractions fall
/// back to the intersection of operand boxes and the base box respectively.
pub fn bounding_box<T: Real>(scene: &SdfScene<T>) -> Option<Aabb<T>> {
    let root = Placement {
        scale: T::one(),
        rotation: Mat3::identity(),
        offset: Vec3::zero(),
    };
    bound(scene, &root)
}

fn bound<T: Real>(scene: &SdfScene<T>, at: &Placement<T>) -> Option<Aabb<T>> {
    match scene {
        SdfScene::Ball { center, radius } => {
            Some(Aabb::around(at.apply(*center), Vec3::splat(*radius * at.scale)))
        }
        SdfScene::Cuboid { center, half_extents } => {
            let mut b: Option<Aabb<T>> = None;
            for corner in 0..8u8 {
                let sign = |bit: u8| if corner & bit != 0 { T::one() } else { -T::one() };
                let local = *center
                    + Vec3::new(
                        half_extents.x * sign(1),
                        half_extents.y * sign(2),
                        half_extents.z * sign(4),
                    );
                let w = at.apply(local);
                let pb = Aabb::new(w, w);
                b = Some(b.map_or(pb, |acc| acc.union(&pb)));
            }
            b
        }
        SdfScene::Torus {
            center,
            axis,
            ring_radius,
            tube_radius,
        } => {
            let n = at.rotation.mul_vec(*axis);
            let half = n.map(|nk| {
                let planar = (T::one() - nk * nk).max(T::zero()).sqrt();
                (*ring_radius * planar + *tube_radius) * at.scale
            });
            Some(Aabb::around(at.apply(*center), half))
        }
        SdfScene::Cylinder {
            center,
            axis,
            radius,
            half_height,
        } => {
            let n = at.rotation.mul_vec(*axis);
            let half = n.map(|nk| {
                let planar = (T::one() - nk * nk).max(T::zero()).sqrt();
                (*half_height * nk.abs() + *radius * planar) * at.scale
            });
            Some(Aabb::around(at.apply(*center), half))
        }
        SdfScene::Union(cs) => cs
            .iter()
            .filter_map(|c| bound(c, at))
            .reduce(|a, b| a.union(&b)),
        SdfScene::Intersection(cs) => {
            let mut acc = bound(&cs[0], at)?;
            for c in &cs[1..] {
                acc = acc.intersection(&bound(c, at)?)?;
            }
            Some(acc)
        }
        SdfScene::Subtraction { base, .. } => bound(base, at),
        SdfScene::Translate { offset, child } => {
            let next = Placement {
                offset: at.apply(*offset),
                ..*at
            };
            bound(child, &next)
        }
        SdfScene::Rotate { rotation, child } => {
            let next = Placement {
                rotation: at.rotation.mul_mat(rotation.matrix()),
                ..*at
            };
            bound(child, &next)
        }
        SdfScene::Scale { factor, child } => {
            let next = Placement {
                scale: at.scale * *factor,
                ..*at
            };
            bound(child, &next)
        }
    }
}

/// Cell budget for the emptiness probe.
const PROBE_MAX_DEPTH: u32 = 7;
const PROBE_MAX_CELLS: usize = 200_000;

/// Decides whether `{sdf <= 0}` inside `region` is non-empty by octree refinement,
/// using that every scene is 1-Lipschitz: a cell whose centre value exceeds its
/// half-diagonal holds no occupied point. Shapes thinner than the finest probe cell
/// are reported empty.
pub fn is_occupied<T: Real>(scene: &SdfScene<T>, region: &Aabb<T>) -> bool {
    let mut frontier = vec![*region];
    for _ in 0..=PROBE_MAX_DEPTH {
        let mut next = Vec::new();
        for cell in &frontier {
            let v = scene.eval(cell.center());
            if v <= T::zero() {
                return true;
            }
            if v <= cell.size().norm() * T::lit(0.5) {
                let c = cell.center();
                for octant in 0..8u8 {
                    let pick = |bit: u8, axis: usize| {
                        if octant & bit != 0 {
                            (c.get(axis), cell.max.get(axis))
                        } else {
                            (cell.min.get(axis), c.get(axis))
                        }
                    };
                    let (x0, x1) = pick(1, 0);
                    let (y0, y1) = pick(2, 1);
                    let (z0, z1) = pick(4, 2);
                    next.push(Aabb::new(Vec3::new(x0, y0, z0), Vec3::new(x1, y1, z1)));
                }
            }
        }
        if next.is_empty() || next.len() > PROBE_MAX_CELLS {
            return false;
        }
        frontier = next;
    }
    false
}

/// Half-width of the target normalization box.
pub const NORMALIZED_HALF_EXTENT: f64 = 0.4;

/// Uniformly scales and translates `scene` so that its bounding box is centred at the
/// origin and its largest side spans `[-0.4, 0.4]`.
///
/// Translations and scales are folded into the primitives; rotation nodes remain.
pub fn normalize_scene<T: Real>(scene: &SdfScene<T>) -> Result<SdfScene<T>> {
    scene.validate()?;
    let bbox = bounding_box(scene).ok_or(Error::EmptyShape)?;
    if !is_occupied(scene, &bbox) {
        return Err(Error::EmptyShape);
    }
    let extent = bbox.size().max_elem();
    if extent.is_nan() || extent <= T::zero() {
        return Err(Error::EmptyShape);
    }
    let scale = T::lit(2.0 * NORMALIZED_HALF_EXTENT) / extent;
    let center = bbox.center();
    Ok(apply_similarity(scene, scale, -(center * scale)))
}

/// Returns a scene whose occupied set is the image of `scene`'s under
/// `x -> scale * x + offset`, with no translate or scale nodes left.
pub fn apply_similarity<T: Real>(scene: &SdfScene<T>, scale: T, offset: Vec3<T>) -> SdfScene<T> {
    let place = |c: Vec3<T>| c * scale + offset;
    match scene {
        SdfScene::Ball { center, radius } => SdfScene::Ball {
            center: place(*center),
            radius: *radius * scale,
        },
        SdfScene::Cuboid { center, half_extents } => SdfScene::Cuboid {
            center: place(*center),
            half_extents: *half_extents * scale,
        },
        SdfScene::Torus {
            center,
            axis,
            ring_radius,
            tube_radius,
        } => SdfScene::Torus {
            center: place(*center),
            axis: *axis,
            ring_radius: *ring_radius * scale,
            tube_radius: *tube_radius * scale,
        },
        SdfScene::Cylinder {
            center,
            axis,
            radius,
            half_height,
        } => SdfScene::Cylinder {
            center: place(*center),
            axis: *axis,
            radius: *radius * scale,
            half_height: *half_height * scale,
        },
        SdfScene::Union(cs) => {
            SdfScene::Union(cs.iter().map(|c| apply_similarity(c, scale, offset)).collect())
        }
        SdfScene::Intersection(cs) => {
            SdfScene::Intersection(cs.iter().map(|c| apply_similarity(c, scale, offset)).collect())
        }
        SdfScene::Subtraction { base, cut } => SdfScene::Subtraction {
            base: Box::new(apply_similarity(base, scale, offset)),
            cut: Box::new(apply_similarity(cut, scale, offset)),
        },
        SdfScene::Translate { offset: t, child } => {
            apply_similarity(child, scale, *t * scale + offset)
        }
        SdfScene::Scale { factor, child } => apply_similarity(child, scale * *factor, offset),
        SdfScene::Rotate { rotation, child } => {
            // s R x + t = R (s x + R^T t)
            let inner = rotation.matrix().transpose().mul_vec(offset);
            SdfScene::Rotate {
                rotation: rotation.clone(),
                child: Box::new(apply_similarity(child, scale, inner)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn close(a: Vec3<f64>, b: Vec3<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn tight_ball_is_unchanged() {
        let s = SdfScene::ball(v(0.0, 0.0, 0.0), 0.4).unwrap();
        assert_eq!(normalize_scene(&s).unwrap(), s);
    }

    #[test]
    fn large_ball_is_halved() {
        let s = SdfScene::ball(v(0.0, 0.0, 0.0), 0.8).unwrap();
        let n = normalize_scene(&s).unwrap();
        assert_eq!(n, SdfScene::ball(v(0.0, 0.0, 0.0), 0.4).unwrap());
    }

    #[test]
    fn offset_ball_is_recentred_and_scaled() {
        let s = SdfScene::ball(v(0.3, 0.0, 0.0), 0.1).unwrap();
        match normalize_scene(&s).unwrap() {
            SdfScene::Ball { center, radius } => {
                assert!(close(center, v(0.0, 0.0, 0.0), 1e-12), "{center:?}");
                assert!((radius - 0.4).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn torus_box_is_exact_under_rotation() {
        let t = SdfScene::torus(v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0), 0.25, 0.1).unwrap();
        let b = bounding_box(&t).unwrap();
        assert!(close(b.max, v(0.35, 0.35, 0.1), 1e-15));
        let r = t.rotate(v(1.0, 0.0, 0.0), std::f64::consts::FRAC_PI_2).unwrap();
        let b = bounding_box(&r).unwrap();
        assert!(close(b.max, v(0.35, 0.1, 0.35), 1e-12), "{b:?}");
    }

    #[test]
    fn disjoint_intersection_is_empty() {
        let s = SdfScene::intersection(vec![
            SdfScene::ball(v(-0.3, 0.0, 0.0), 0.1).unwrap(),
            SdfScene::ball(v(0.3, 0.0, 0.0), 0.1).unwrap(),
        ])
        .unwrap();
        assert!(matches!(normalize_scene(&s), Err(Error::EmptyShape)));
    }

    #[test]
    fn fully_carved_shape_is_empty() {
        let s = SdfScene::subtraction(
            SdfScene::ball(v(0.0, 0.0, 0.0), 0.1).unwrap(),
            SdfScene::ball(v(0.0, 0.0, 0.0), 0.3).unwrap(),
        );
        assert!(matches!(normalize_scene(&s), Err(Error::EmptyShape)));
    }

    #[test]
    fn similarity_pushes_through_rotation() {
        let inner = SdfScene::ball(v(0.2, 0.0, 0.0), 0.05).unwrap();
        let s = inner
            .rotate(v(0.0, 0.0, 1.0), 1.1)
            .unwrap()
            .translate(v(0.1, -0.2, 0.05))
            .unwrap()
            .scale(1.7)
            .unwrap();
        let flat = apply_similarity(&s, 1.0, Vec3::zero());
        for p in [v(0.1, 0.2, 0.3), v(-0.4, 0.0, 0.1), v(0.3, -0.3, 0.0)] {
            assert!((flat.eval(p) - s.eval(p)).abs() < 1e-12);
        }
    }
}
