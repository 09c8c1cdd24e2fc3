use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topoforge::cubical::{build_filtration, compute_persistence, PersistenceDiagramSet, PersistencePair, CellId};
use topoforge::field::{default_bounds, rasterize, SdfScene, VolumeGrid};
use topoforge::geom::Vec3;
use topoforge::pd::*;

fn diagram_with(pairs: &[(usize, f64, f64)]) -> PersistenceDiagramSet<f64> {
    let pairs = pairs
        .iter()
        .map(|&(dim, b, d)| PersistencePair {
            dim,
            birth: b,
            death: d,
            birth_cell: CellId(0),
            death_cell: d.is_finite().then_some(CellId(1)),
        })
        .collect();
    PersistenceDiagramSet::new(pairs, [2, 2, 2], (-1.0, 0.5))
}

fn random_diagram(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let b: f64 = rng.random_range(-1.0..1.0);
            (b, b + rng.random_range(0.0..0.8))
        })
        .collect()
}

/// Exhaustive 1-Wasserstein: every partial injection of `a` into `b`, the rest to
/// the diagonal.
fn wasserstein_brute(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if i == a.len() {
            let rest: f64 = b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(p, _)| (p.1 - p.0) / 2.0)
                .sum();
            *best = best.min(acc + rest);
            return;
        }
        go(i + 1, a, b, used, acc + (a[i].1 - a[i].0) / 2.0, best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let c = (a[i].0 - b[j].0).abs().max((a[i].1 - b[j].1).abs());
                go(i + 1, a, b, used, acc + c, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

/// Landscape by direct tent evaluation, independent of the library code.
fn landscape_brute(bd: &[(f64, f64)], k: usize, t: f64) -> f64 {
    let mut tents: Vec<f64> = bd
        .iter()
        .map(|&(b, d)| {
            let up = t - b;
            let down = d - t;
            let m = if up < down { up } else { down };
            if m > 0.0 { m } else { 0.0 }
        })
        .collect();
    tents.sort_by(|x, y| y.partial_cmp(x).unwrap());
    tents.get(k - 1).copied().unwrap_or(0.0)
}

#[test]
fn to_points_examples() {
    let d = diagram_with(&[(1, -0.1, 0.15), (0, -1.0, f64::INFINITY)]);
    let p1 = to_points(&d, 1).unwrap();
    assert_eq!(p1.len(), 1);
    assert_eq!(p1.points()[0].birth, -0.1);
    assert!((p1.points()[0].persistence - 0.25).abs() < 1e-15);
    let p0 = to_points(&d, 0).unwrap();
    assert_eq!(p0.points()[0], PersistencePoint { birth: -1.0, persistence: 1.5, capped: true, pad: false });
    assert!(to_points(&d, 2).unwrap().is_empty());
    assert!(p0.without_capped().is_empty());
}

#[test]
fn torus_has_one_long_loop() {
    let res = 64;
    let h = 1.0 / (res - 1) as f64;
    let torus = SdfScene::torus(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 0.25, 0.1).unwrap();
    let grid = rasterize(&torus, [res; 3], default_bounds()).unwrap();
    let pts = to_points(&compute_persistence(&build_filtration(grid).unwrap()), 1).unwrap();
    let long: Vec<_> = pts.points().iter().filter(|p| p.persistence > 0.2).collect();
    assert_eq!(long.len(), 1);
    assert!(pts.points()[1..].iter().all(|p| p.persistence < 4.0 * h));
    assert_eq!(pts.points()[0], *long[0]);
}

#[test]
fn image_of_empty_set_is_zero() {
    let empty = PersistencePointSet::<f64>::from_pairs(1, &[]).unwrap();
    let params = PersistenceImageParams::defaults_for([&empty]);
    let img = persistence_image(&empty, &params).unwrap();
    assert_eq!(img.dim(), (32, 32));
    assert!(img.iter().all(|&v| v == 0.0));
}

#[test]
fn single_point_image_is_centred_and_symmetric() {
    let s = PersistencePointSet::from_pairs(1, &[(0.0, 0.5)]).unwrap();
    let params = PersistenceImageParams {
        resolution: (31, 31),
        range: PiRange { birth: (-0.5, 0.5), persistence: (0.0, 1.0) },
        sigma: 0.1,
        weight: PiWeight::Constant,
    };
    let img = persistence_image(&s, &params).unwrap();
    let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
    for ((r, c), &v) in img.indexed_iter() {
        if v > best {
            best = v;
            at = (r, c);
        }
    }
    assert_eq!(at, (15, 15));
    for ((r, c), &v) in img.indexed_iter() {
        assert!((v - img[[30 - r, 30 - c]]).abs() <= 1e-9 * best);
    }
}

#[test]
fn image_is_additive_over_disjoint_diagrams() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a: Vec<(f64, f64)> = (0..6).map(|_| (rng.random_range(-0.3..0.3), rng.random_range(0.0..0.4))).collect();
    let b: Vec<(f64, f64)> = (0..4).map(|_| (rng.random_range(-0.3..0.3), rng.random_range(0.0..0.4))).collect();
    let sa = PersistencePointSet::from_pairs(1, &a).unwrap();
    let sb = PersistencePointSet::from_pairs(1, &b).unwrap();
    let all: Vec<_> = a.iter().chain(&b).copied().collect();
    let sab = PersistencePointSet::from_pairs(1, &all).unwrap();
    let params = PersistenceImageParams::defaults_for([&sab]);
    let ia = persistence_image(&sa, &params).unwrap();
    let ib = persistence_image(&sb, &params).unwrap();
    let iab = persistence_image(&sab, &params).unwrap();
    for ((x, y), z) in ia.iter().zip(ib.iter()).zip(iab.iter()) {
        assert!((x + y - z).abs() <= 1e-9);
    }
}

#[test]
fn padded_points_do_not_contribute() {
    let s = PersistencePointSet::from_pairs(1, &[(0.1, 0.2)]).unwrap();
    let padded = s.top_k(16).unwrap();
    let params = PersistenceImageParams::defaults_for([&s]);
    assert_eq!(persistence_image(&s, &params).unwrap(), persistence_image(&padded, &params).unwrap());
}

#[test]
fn image_rejects_bad_parameters() {
    let s = PersistencePointSet::from_pairs(1, &[(0.1, 0.2)]).unwrap();
    let mut params = PersistenceImageParams::defaults_for([&s]);
    params.range.birth = (0.1, 0.1);
    assert!(persistence_image(&s, &params).is_err());
    params = PersistenceImageParams::defaults_for([&s]);
    params.sigma = 0.0;
    assert!(persistence_image(&s, &params).is_err());
}

#[test]
fn landscape_examples() {
    let single = PersistencePointSet::<f64>::from_pairs(1, &[(0.2, 0.6)]).unwrap();
    let l = persistence_landscape(&single, 2, &[0.5, 0.3, 1.0]).unwrap();
    assert!((l[0][0] - 0.3).abs() < 1e-15);
    assert!(l[1].iter().all(|&v| v == 0.0));
    assert!(persistence_landscape(&single, 0, &[0.0]).is_err());

    // (birth, death) = (0, 2) and (1, 3)
    let two = PersistencePointSet::from_pairs(1, &[(0.0, 2.0), (1.0, 2.0)]).unwrap();
    let expected = landscape_brute(&[(0.0, 2.0), (1.0, 3.0)], 1, 1.5);
    assert_eq!(expected, 0.5);
    let got = persistence_landscape(&two, 2, &[1.5]).unwrap();
    assert_eq!(got[0][0], expected);
    assert_eq!(got[1][0], landscape_brute(&[(0.0, 2.0), (1.0, 3.0)], 2, 1.5));
}

#[test]
fn landscape_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let bd = random_diagram(&mut rng, 7);
        let pts: Vec<_> = bd.iter().map(|&(b, d)| (b, d - b)).collect();
        let s = PersistencePointSet::from_pairs(1, &pts).unwrap();
        let ts = linspace(-1.0, 2.0, 41);
        let l = persistence_landscape(&s, 3, &ts).unwrap();
        for k in 1..=3 {
            for (i, &t) in ts.iter().enumerate() {
                assert!((l[k - 1][i] - landscape_brute(&bd, k, t)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn wasserstein_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 0..=5 {
        for _ in 0..6 {
            let a = random_diagram(&mut rng, n);
            let b = random_diagram(&mut rng, 5 - n / 2);
            let w = wasserstein_distance(&a, &b).unwrap();
            assert!((w - wasserstein_brute(&a, &b)).abs() < 1e-12, "{w}");
        }
    }
}

#[test]
fn distances_are_pseudometrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..30 {
        let a = random_diagram(&mut rng, 6);
        let b = random_diagram(&mut rng, 4);
        let c = random_diagram(&mut rng, 5);
        for dist in [bottleneck_distance::<f64>, wasserstein_distance::<f64>] {
            let ab = dist(&a, &b).unwrap();
            assert!((ab - dist(&b, &a).unwrap()).abs() <= 1e-9);
            assert!(ab <= dist(&a, &c).unwrap() + dist(&c, &b).unwrap() + 1e-9);
            assert_eq!(dist(&a, &a).unwrap(), 0.0);
        }
        assert!(bottleneck_distance(&a, &b).unwrap() <= wasserstein_distance(&a, &b).unwrap() + 1e-12);
    }
}

#[test]
fn landscape_is_lipschitz_in_bottleneck() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let ts = linspace(-1.5, 2.5, 401);
    for _ in 0..30 {
        let a = random_diagram(&mut rng, 5);
        let b = random_diagram(&mut rng, 6);
        let la = persistence_landscape(&PersistencePointSet::from_pairs(1, &a.iter().map(|&(x, y)| (x, y - x)).collect::<Vec<_>>()).unwrap(), 1, &ts).unwrap();
        let lb = persistence_landscape(&PersistencePointSet::from_pairs(1, &b.iter().map(|&(x, y)| (x, y - x)).collect::<Vec<_>>()).unwrap(), 1, &ts).unwrap();
        let gap = la[0].iter().zip(&lb[0]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap <= bottleneck_distance(&a, &b).unwrap() + 1e-12);
    }
}

fn capped_points(grid: VolumeGrid<f64>, dim: usize) -> Vec<(f64, f64)> {
    let pd = compute_persistence(&build_filtration(grid).unwrap()).without_zero_persistence();
    to_points(&pd, dim).unwrap().birth_death()
}

#[test]
fn sublevel_persistence_is_stable() {
    let scene = SdfScene::union(vec![
        SdfScene::torus(Vec3::new(-0.15, 0.0, 0.0), Vec3::new(0.0, 1.0, 1.0), 0.18, 0.06).unwrap(),
        SdfScene::ball(Vec3::new(0.25, 0.1, 0.0), 0.12).unwrap(),
    ])
    .unwrap();
    let base = rasterize(&scene, [16; 3], default_bounds()).unwrap();
    for (i, eps) in [0.005, 0.01, 0.02].into_iter().enumerate() {
        for seed in 0..7u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * i as u64 + seed);
            let hit = rng.random_range(0..base.len());
            let vals: Vec<f64> = base
                .values()
                .iter()
                .enumerate()
                .map(|(j, &v)| v + if j == hit { eps } else { rng.random_range(-eps..=eps) })
                .collect();
            let perturbed = VolumeGrid::new(base.dims(), *base.bounds(), vals).unwrap();
            for dim in 0..3 {
                let a = capped_points(base.clone(), dim);
                let b = capped_points(perturbed.clone(), dim);
                let d = bottleneck_distance(&a, &b).unwrap();
                assert!(d <= eps + 1e-9, "dim {dim} eps {eps}: {d}");
            }
        }
    }
}

fn point_set_strategy() -> impl Strategy<Value = PersistencePointSet<f64>> {
    prop::collection::vec((-1.0f64..1.0, 0.0f64..1.0), 0..24)
        .prop_map(|v| PersistencePointSet::from_pairs(1, &v).unwrap())
}

proptest! {
    #[test]
    fn top_k_is_idempotent(s in point_set_strategy(), k in 1usize..20) {
        let once = s.top_k(k).unwrap();
        prop_assert_eq!(once.top_k(k).unwrap(), once);
    }

    #[test]
    fn edits_never_increase_and_compose(s in point_set_strategy(), f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0) {
        prop_assume!(!s.is_empty());
        let target = s.points()[0];
        let once = s.edit_toward_diagonal(0, f1).unwrap();
        let max_before = s.points().iter().map(|p| p.persistence).fold(0.0, f64::max);
        let max_after = once.points().iter().map(|p| p.persistence).fold(0.0, f64::max);
        prop_assert!(max_after <= max_before);
        let idx = once.points().iter().position(|p| p.birth == target.birth && p.persistence == if f1 == 1.0 { 0.0 } else { target.persistence * (1.0 - f1) }).unwrap();
        let twice = once.edit_toward_diagonal(idx, f2).unwrap();
        let single = s.edit_toward_diagonal(0, 1.0 - (1.0 - f1) * (1.0 - f2)).unwrap();
        let mut a: Vec<f64> = twice.points().iter().map(|p| p.persistence).collect();
        let mut b: Vec<f64> = single.points().iter().map(|p| p.persistence).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
