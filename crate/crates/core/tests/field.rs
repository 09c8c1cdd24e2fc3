use proptest::prelude::*;

use topoforge::field::*;
use topoforge::geom::Vec3;
use topoforge::Error;

fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
    Vec3::new(x, y, z)
}

fn torus() -> SdfScene<f64> {
    SdfScene::torus(Vec3::zero(), v(0.0, 0.0, 1.0), 0.25, 0.1).unwrap()
}

#[test]
fn primitive_values() {
    let ball = SdfScene::ball(Vec3::zero(), 0.3).unwrap();
    assert_eq!(eval_sdf(&ball, Vec3::zero()), -0.3);
    assert!((eval_sdf(&torus(), Vec3::zero()) - 0.15).abs() < 1e-15);
    let a = SdfScene::ball(v(0.2, 0.0, 0.0), 0.1).unwrap();
    let b = SdfScene::ball(v(-0.1, 0.1, 0.0), 0.2).unwrap();
    let u = SdfScene::union(vec![a.clone(), b.clone()]).unwrap();
    let p = v(0.05, 0.3, -0.2);
    assert_eq!(eval_sdf(&u, p), eval_sdf(&a, p).min(eval_sdf(&b, p)));
}

#[test]
fn torus_raster_minimum() {
    let g = rasterize(&torus(), [64; 3], default_bounds()).unwrap();
    let h = g.spacing().x;
    let brute = g.values().iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(g.min_value(), brute);
    assert!((brute + 0.1).abs() <= h);
}

#[test]
fn ball_occupied_fraction() {
    let ball = SdfScene::ball(Vec3::zero(), 0.3).unwrap();
    let occ = occupancy(&rasterize(&ball, [64; 3], default_bounds()).unwrap());
    let frac = occ.values().iter().sum::<f64>() / occ.len() as f64;
    let analytic = 4.0 / 3.0 * std::f64::consts::PI * 0.3f64.powi(3);
    assert!((frac - analytic).abs() < 0.005, "{frac}");
    assert_eq!(occ.kind(), FieldKind::Occupancy);
}

#[test]
fn occupancy_extremes_and_idempotence() {
    let neg = VolumeGrid::<f64>::constant([3, 3, 3], -1.0).unwrap();
    assert!(occupancy(&neg).values().iter().all(|&x| x == 1.0));
    let pos = VolumeGrid::<f64>::constant([3, 3, 3], 1.0).unwrap();
    assert!(occupancy(&pos).values().iter().all(|&x| x == 0.0));
    let g = rasterize(&torus(), [16; 3], default_bounds()).unwrap();
    let o = occupancy(&g);
    assert_eq!(occupancy(&o), o);
}

#[test]
fn normalization_examples() {
    let ball = |c: Vec3<f64>, r: f64| SdfScene::ball(c, r).unwrap();
    let close = |s: &SdfScene<f64>, c: Vec3<f64>, r: f64| {
        let b = bounding_box(s).unwrap();
        assert!((b.center() - c).norm() < 1e-12, "{:?}", b);
        assert!((b.size().x - 2.0 * r).abs() < 1e-12);
        for p in [v(0.1, 0.2, -0.3), v(0.4, 0.0, 0.0), Vec3::zero()] {
            assert!((eval_sdf(s, p) - ((p - c).norm() - r)).abs() < 1e-12);
        }
    };
    close(&normalize_scene(&ball(Vec3::zero(), 0.4)).unwrap(), Vec3::zero(), 0.4);
    close(&normalize_scene(&ball(Vec3::zero(), 0.8)).unwrap(), Vec3::zero(), 0.4);
    close(&normalize_scene(&ball(v(0.3, 0.0, 0.0), 0.1)).unwrap(), Vec3::zero(), 0.4);

    let empty = SdfScene::intersection(vec![ball(v(-0.3, 0.0, 0.0), 0.1), ball(v(0.3, 0.0, 0.0), 0.1)]).unwrap();
    let err = normalize_scene(&empty).unwrap_err();
    assert!(matches!(err, Error::EmptyShape));
    assert_eq!(err.to_string(), "empty shape");
}

#[test]
fn normalized_scene_fits_and_touches() {
    let scene = SdfScene::union(vec![
        torus().rotate(v(1.0, 1.0, 0.0), 0.7).unwrap(),
        SdfScene::cuboid(v(0.3, -0.2, 0.1), v(0.1, 0.2, 0.05)).unwrap(),
    ])
    .unwrap();
    let n = normalize_scene(&scene).unwrap();
    let b = bounding_box(&n).unwrap();
    let half = NORMALIZED_HALF_EXTENT;
    for a in 0..3 {
        assert!(b.min.get(a) >= -half - 1e-9 && b.max.get(a) <= half + 1e-9);
    }
    assert!((b.size().max_elem() - 2.0 * half).abs() < 1e-9);
    let again = normalize_scene(&n).unwrap();
    for p in [v(0.1, 0.0, 0.0), v(-0.2, 0.3, 0.1), v(0.0, 0.0, 0.35)] {
        assert!((eval_sdf(&again, p) - eval_sdf(&n, p)).abs() < 1e-6);
    }
}

#[test]
fn sphere_samples() {
    let ball = SdfScene::ball(Vec3::zero(), 0.3).unwrap();
    let pts: Vec<Vec3<f64>> = sample_surface(&ball, 100, 4).unwrap();
    assert_eq!(pts.len(), 100);
    assert!(pts.iter().all(|p| (p.norm() - 0.3).abs() <= 1e-4));
    assert_eq!(pts, sample_surface(&ball, 100, 4).unwrap());
    assert_ne!(pts, sample_surface(&ball, 100, 5).unwrap());
}

#[test]
fn torus_samples_mean_axis_distance() {
    // Area element of the torus is r (R + r cos φ) dθ dφ, so the mean of the axis
    // distance R + r cos φ over the surface is R + r² / (2R).
    let (big_r, r) = (0.25, 0.1);
    let pts = sample_surface(&torus(), 10_000, 1).unwrap();
    assert!(pts.iter().all(|p| eval_sdf(&torus(), *p).abs() <= SURFACE_TOLERANCE));
    let mean = pts.iter().map(|p| p.x.hypot(p.y)).sum::<f64>() / pts.len() as f64;
    let oracle = big_r + r * r / (2.0 * big_r);
    assert!((mean - oracle).abs() < 0.02 * oracle, "{mean} vs {oracle}");
}

#[test]
fn sampling_an_empty_scene_fails() {
    let empty = SdfScene::intersection(vec![
        SdfScene::ball(v(-0.3, 0.0, 0.0), 0.1).unwrap(),
        SdfScene::ball(v(0.3, 0.0, 0.0), 0.1).unwrap(),
    ])
    .unwrap();
    assert!(matches!(sample_surface(&empty, 3, 0), Err(Error::NoSurfaceFound | Error::EmptyShape)));
}

#[test]
fn volume_file_round_trip_and_layout() {
    let g = rasterize(&torus(), [5, 4, 3], default_bounds()).unwrap();
    let bytes = g.to_bytes();
    assert_eq!(&bytes[..4], b"VGRD");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
    assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 3);
    assert_eq!(f32::from_le_bytes(bytes[20..24].try_into().unwrap()), -0.5);
    assert_eq!(bytes.len(), 44 + 4 * 60);
    // second value is (i, j, k) = (1, 0, 0): x varies fastest
    assert_eq!(f32::from_le_bytes(bytes[48..52].try_into().unwrap()), g.get(1, 0, 0) as f32);
    let back = VolumeGrid::<f64>::from_bytes(&bytes).unwrap();
    assert_eq!(back.to_bytes(), bytes);
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(VolumeGrid::<f64>::from_bytes(&bad).is_err());
    assert!(VolumeGrid::<f64>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn scene_text_round_trip() {
    let src = "(union (torus (0 0 0) (0 0 1) 0.25 0.1) (subtract (box (0.3 0 0) (0.1 0.1 0.1)) (ball (0.3 0 0) 0.05)))";
    let s: SdfScene<f64> = parse_scene(src).unwrap();
    let again: SdfScene<f64> = parse_scene(&format_scene(&s)).unwrap();
    assert_eq!(s, again);
}

fn primitive() -> impl Strategy<Value = SdfScene<f64>> {
    let c = (-0.3f64..0.3, -0.3f64..0.3, -0.3f64..0.3).prop_map(|(x, y, z)| v(x, y, z));
    prop_oneof![
        (c.clone(), 0.05f64..0.3).prop_map(|(c, r)| SdfScene::ball(c, r).unwrap()),
        (c.clone(), 0.05f64..0.2, 0.05f64..0.2, 0.05f64..0.2)
            .prop_map(|(c, a, b, d)| SdfScene::cuboid(c, v(a, b, d)).unwrap()),
        (c, 0.1f64..0.25, 0.02f64..0.08).prop_map(|(c, big, small)| SdfScene::torus(c, v(0.3, 0.1, 1.0), big, small).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csg_combines_by_min_and_max(a in primitive(), b in primitive(), x in -0.5f64..0.5, y in -0.5f64..0.5, z in -0.5f64..0.5) {
        let p = v(x, y, z);
        let (da, db) = (eval_sdf(&a, p), eval_sdf(&b, p));
        let u = SdfScene::union(vec![a.clone(), b.clone()]).unwrap();
        let i = SdfScene::intersection(vec![a.clone(), b.clone()]).unwrap();
        let d = SdfScene::subtraction(a.clone(), b.clone());
        prop_assert!(eval_sdf(&u, p) <= da && eval_sdf(&u, p) <= db);
        prop_assert!(eval_sdf(&i, p) >= da && eval_sdf(&i, p) >= db);
        prop_assert_eq!(eval_sdf(&d, p), da.max(-db));
    }

    #[test]
    fn rasterization_is_positively_homogeneous(a in primitive(), lambda in 0.25f64..4.0) {
        let dims = [7, 6, 5];
        let base = rasterize(&a, dims, default_bounds()).unwrap();
        let b = default_bounds::<f64>();
        let scaled_bounds = Aabb::new(b.min * lambda, b.max * lambda);
        let scaled = rasterize(&a.clone().scale(lambda).unwrap(), dims, scaled_bounds).unwrap();
        for (x, y) in base.values().iter().zip(scaled.values()) {
            prop_assert!((lambda * x - y).abs() < 1e-6);
        }
    }
}
