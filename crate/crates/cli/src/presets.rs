//! Named scenes with known Betti numbers at t = 0, and seeded random CSG scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topoforge::field::SdfScene;
use topoforge::geom::Vec3;
use topoforge::Result;

pub const PRESET_NAMES: [&str; 7] = ["ball", "shell", "torus", "double-torus", "two-balls", "holed-box", "random-csg"];

/// The six presets with exact ground truth.
pub const FIXED_PRESETS: [&str; 6] = ["ball", "shell", "torus", "double-torus", "two-balls", "holed-box"];

fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
    Vec3::new(x, y, z)
}

const Z: [f64; 3] = [0.0, 0.0, 1.0];

/// Scene and Betti numbers at t = 0 of a fixed preset.
pub fn preset(name: &str) -> Option<(SdfScene<f64>, [usize; 3])> {
    let o = v(0.0, 0.0, 0.0);
    let z = Vec3::from_array(Z);
    let built = match name {
        "ball" => (SdfScene::ball(o, 0.3), [1, 0, 0]),
        "shell" => (
            SdfScene::ball(o, 0.35).and_then(|a| Ok(SdfScene::subtraction(a, SdfScene::ball(o, 0.2)?))),
            [1, 0, 1],
        ),
        "torus" => (SdfScene::torus(o, z, 0.25, 0.1), [1, 1, 0]),
        "double-torus" => (
            (|| {
                SdfScene::union(vec![
                    SdfScene::torus(v(-0.18, 0.0, 0.0), z, 0.14, 0.06)?,
                    SdfScene::torus(v(0.18, 0.0, 0.0), z, 0.14, 0.06)?,
                    SdfScene::cuboid(o, v(0.06, 0.05, 0.05))?,
                ])
            })(),
            [1, 2, 0],
        ),
        "two-balls" => (
            SdfScene::ball(v(-0.2, 0.0, 0.0), 0.12)
                .and_then(|a| SdfScene::union(vec![a, SdfScene::ball(v(0.2, 0.0, 0.0), 0.12)?])),
            [2, 0, 0],
        ),
        "holed-box" => (
            (|| {
                Ok(SdfScene::subtraction(
                    SdfScene::cuboid(o, v(0.3, 0.3, 0.1))?,
                    SdfScene::cylinder(o, z, 0.1, 0.2)?,
                ))
            })(),
            [1, 1, 0],
        ),
        _ => return None,
    };
    Some((built.0.expect("preset parameters are valid"), built.1))
}

fn unit_axis(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let a = v(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = a.norm();
        if n > 0.1 && n <= 1.0 {
            return a * (1.0 / n);
        }
    }
}

fn primitive(rng: &mut ChaCha8Rng) -> Result<SdfScene<f64>> {
    let c = v(
        rng.random_range(-0.25..0.25),
        rng.random_range(-0.25..0.25),
        rng.random_range(-0.25..0.25),
    );
    match rng.random_range(0..4) {
        0 => SdfScene::ball(c, rng.random_range(0.06..0.2)),
        1 => {
            let h = v(
                rng.random_range(0.04..0.18),
                rng.random_range(0.04..0.18),
                rng.random_range(0.04..0.18),
            );
            SdfScene::cuboid(v(0.0, 0.0, 0.0), h)?.rotate(unit_axis(rng), rng.random_range(0.0..std::f64::consts::PI))?.translate(c)
        }
        2 => {
            let ring = rng.random_range(0.08..0.18);
            SdfScene::torus(c, unit_axis(rng), ring, rng.random_range(0.03..0.45 * ring))
        }
        _ => SdfScene::cylinder(c, unit_axis(rng), rng.random_range(0.04..0.12), rng.random_range(0.05..0.2)),
    }
}

/// Union of 2 to 5 random primitives, sometimes with a ball carved out.
pub fn random_csg(seed: u64, index: u64) -> SdfScene<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.random_range(2..=5);
    let parts = (0..n).map(|_| primitive(&mut rng)).collect::<Result<Vec<_>>>().expect("valid primitives");
    let body = SdfScene::union(parts).expect("non-empty union");
    if rng.random_bool(0.3) {
        let c = v(
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
        );
        SdfScene::subtraction(body, SdfScene::ball(c, rng.random_range(0.04..0.12)).expect("valid ball"))
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_presets_build() {
        for name in FIXED_PRESETS {
            assert!(preset(name).is_some(), "{name}");
        }
        assert!(preset("random-csg").is_none());
        assert!(preset("nope").is_none());
    }

    #[test]
    fn random_scenes_are_seeded() {
        assert_eq!(random_csg(7, 3), random_csg(7, 3));
        assert_ne!(random_csg(7, 3), random_csg(7, 4));
        assert_ne!(random_csg(7, 3), random_csg(8, 3));
    }
}
