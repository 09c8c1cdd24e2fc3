use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scalar::Real;

use super::bounds::{bounding_box, Aabb};
use super::scene::SdfScene;

/// Accepted distance from the zero level set, world units.
pub const SURFACE_TOLERANCE: f64 = 1e-4;
/// Newton projection steps per candidate.
pub const MAX_PROJECTION_STEPS: usize = 50;
const CANDIDATES_PER_POINT: usize = 2_000;

/// Draws `n` points on the zero level set.
///
/// Candidates are drawn uniformly from a padded bounding box and kept when they
/// fall in a thin band around the surface, then projected along the central
/// difference gradient until `|sdf| <= 1e-4`. Band rejection keeps the density
/// roughly proportional to surface area.
pub fn sample_surface<T: Real>(scene: &SdfScene<T>, n: usize, seed: u64) -> Result<Vec<Vec3<T>>> {
    let bbox = bounding_box(scene).ok_or(Error::NoSurfaceFound)?;
    let extent = bbox.size().max_elem().max(T::epsilon());
    let pad = Vec3::splat(extent * T::lit(0.05));
    let region = Aabb::new(bbox.min - pad, bbox.max + pad);
    let band = extent * T::lit(0.02);
    let tol = T::lit(SURFACE_TOLERANCE);
    let step = extent * T::epsilon().cbrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let budget = CANDIDATES_PER_POINT.saturating_mul(n.max(1));
    let mut tries = 0usize;
    while out.len() < n {
        if tries >= budget {
            return Err(Error::NoSurfaceFound);
        }
        tries += 1;
        let mut p = Vec3::new(
            uniform(&mut rng, region.min.x, region.max.x),
            uniform(&mut rng, region.min.y, region.max.y),
            uniform(&mut rng, region.min.z, region.max.z),
        );
        if scene.eval(p).abs() > band {
            continue;
        }
        if project(scene, &mut p, step, tol) {
            out.push(p);
        }
    }
    Ok(out)
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng, lo: T, hi: T) -> T {
    let u: f64 = rng.random();
    lo + (hi - lo) * T::lit(u)
}

fn project<T: Real>(scene: &SdfScene<T>, p: &mut Vec3<T>, step: T, tol: T) -> bool {
    for _ in 0..MAX_PROJECTION_STEPS {
        let d = scene.eval(*p);
        if d.abs() <= tol {
            return true;
        }
        let g = gradient(scene, *p, step);
        let gg = g.norm_squared();
        if gg.is_nan() || gg <= T::epsilon() {
            return false;
        }
        *p = *p - g * (d / gg);
    }
    scene.eval(*p).abs() <= tol
}

/// Central-difference gradient.
pub fn gradient<T: Real>(scene: &SdfScene<T>, p: Vec3<T>, h: T) -> Vec3<T> {
    let two_h = h + h;
    let diff = |e: Vec3<T>| (scene.eval(p + e) - scene.eval(p - e)) / two_h;
    let z = T::zero();
    Vec3::new(
        diff(Vec3::new(h, z, z)),
        diff(Vec3::new(z, h, z)),
        diff(Vec3::new(z, z, h)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_samples_lie_on_the_sphere() {
        let ball = SdfScene::ball(Vec3::<f64>::zero(), 0.3).unwrap();
        let pts = sample_surface(&ball, 100, 11).unwrap();
        assert_eq!(pts.len(), 100);
        for p in &pts {
            assert!((p.norm() - 0.3).abs() <= 1e-4);
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let ball = SdfScene::ball(Vec3::<f32>::new(0.1, 0.0, 0.0), 0.2).unwrap();
        assert_eq!(sample_surface(&ball, 50, 3).unwrap(), sample_surface(&ball, 50, 3).unwrap());
        assert_ne!(sample_surface(&ball, 50, 3).unwrap(), sample_surface(&ball, 50, 4).unwrap());
    }

    #[test]
    fn zero_points_is_fine() {
        let ball = SdfScene::ball(Vec3::<f64>::zero(), 0.3).unwrap();
        assert!(sample_surface(&ball, 0, 1).unwrap().is_empty());
    }
}
