use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topoforge::cubical::{
    betti_at, build_filtration, compute_persistence, compute_persistence_naive, compute_persistence_with,
    euler_characteristic_at, CellId, Fault, PersistenceDiagramSet, ReductionOptions,
};
use topoforge::field::{default_bounds, rasterize, SdfScene, VolumeGrid};
use topoforge::geom::Vec3;

fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
    Vec3::new(x, y, z)
}

fn random_grid(dims: [usize; 3], seed: u64, levels: Option<u32>) -> VolumeGrid<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VolumeGrid::from_fn(dims, default_bounds(), |_, _, _| match levels {
        Some(l) => rng.random_range(0..l) as f64,
        None => rng.random::<f64>(),
    })
    .unwrap()
}

fn torus() -> SdfScene<f64> {
    SdfScene::torus(v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0), 0.25, 0.1).unwrap()
}

fn persistence_of(scene: &SdfScene<f64>, res: usize) -> PersistenceDiagramSet<f64> {
    let grid = rasterize(scene, [res; 3], default_bounds()).unwrap();
    compute_persistence(&build_filtration(grid).unwrap())
}

/// The single dim-1 pair with the largest persistence.
fn dominant_loop(pd: &PersistenceDiagramSet<f64>) -> (f64, f64) {
    let p = pd
        .pairs_of_dim(1)
        .max_by(|a, b| a.persistence().partial_cmp(&b.persistence()).unwrap())
        .unwrap();
    (p.birth, p.death)
}

#[test]
fn fast_reduction_matches_naive_on_random_grids() {
    let mut mismatches = 0;
    for seed in 0..100u64 {
        let n = 4 + (seed as usize % 5);
        let dims = [n, 4 + (seed as usize * 7) % 5, n];
        let levels = if seed % 3 == 0 { Some(4) } else { None };
        let cx = build_filtration(random_grid(dims, seed, levels)).unwrap();
        let fast = compute_persistence(&cx);
        let naive = compute_persistence_naive(&cx).unwrap();
        if fast != naive {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn clearing_does_not_change_the_result() {
    for seed in 0..10 {
        let cx = build_filtration(random_grid([7, 6, 5], 500 + seed, Some(3))).unwrap();
        let on = compute_persistence_with(&cx, ReductionOptions::default());
        let off = compute_persistence_with(&cx, ReductionOptions { clearing: false, fault: None });
        assert_eq!(on.0, off.0);
        assert!(on.1.columns_cleared > 0);
        assert_eq!(off.1.columns_cleared, 0);
    }
}

#[test]
fn injected_fault_is_caught_by_the_oracle() {
    let cx = build_filtration(random_grid([5, 5, 5], 42, None)).unwrap();
    let faulty = compute_persistence_with(
        &cx,
        ReductionOptions {
            clearing: true,
            fault: Some(Fault::DropClearedPairs),
        },
    )
    .0;
    assert_ne!(faulty, compute_persistence_naive(&cx).unwrap());
}

#[test]
fn naive_guard_rejects_large_complexes() {
    let cx = build_filtration(VolumeGrid::<f64>::constant([32, 32, 32], 0.0).unwrap()).unwrap();
    assert!(compute_persistence_naive(&cx).is_err());
}

#[test]
fn constant_box_has_one_essential_component() {
    let cx = build_filtration(VolumeGrid::<f64>::constant([6, 5, 4], -1.0).unwrap()).unwrap();
    for pd in [compute_persistence(&cx), compute_persistence_naive(&cx).unwrap()] {
        let nonzero = pd.without_zero_persistence();
        assert_eq!(nonzero.pairs().len(), 1);
        let p = nonzero.pairs()[0];
        assert_eq!((p.dim, p.birth, p.death), (0, -1.0, f64::INFINITY));
        assert_eq!(pd.essential_count(), 1);
        assert_eq!(pd.betti_at(-1.0), [1, 0, 0]);
        assert_eq!(pd.betti_at(5.0), [1, 0, 0]);
    }
}

#[test]
fn two_cube_pair_count_identity() {
    let cx = build_filtration(random_grid([2, 2, 2], 9, None)).unwrap();
    let pd = compute_persistence_naive(&cx).unwrap();
    assert_eq!(2 * pd.finite_count() + pd.essential_count(), 27);
    assert_eq!(pd.essential_count(), 1);
    assert_eq!(compute_persistence(&cx), pd);
}

#[test]
fn pair_count_identity_on_scenes() {
    let pd = persistence_of(&torus(), 24);
    let cells = (2 * 24 - 1usize).pow(3);
    assert_eq!(2 * pd.finite_count() + pd.essential_count(), cells);
    for p in pd.pairs() {
        assert!(p.birth <= p.death);
        if !p.is_essential() {
            assert!(p.death_cell.is_some());
        }
    }
}

#[test]
fn death_cell_is_one_dimension_up() {
    let cx = build_filtration(random_grid([6, 6, 6], 3, None)).unwrap();
    for p in compute_persistence(&cx).pairs() {
        assert_eq!(cx.dim(p.birth_cell), p.dim);
        if let Some(d) = p.death_cell {
            assert_eq!(cx.dim(d), p.dim + 1);
            assert_eq!(cx.value(d), p.death);
        }
        assert_eq!(cx.value(p.birth_cell), p.birth);
    }
}

#[test]
fn filtration_is_monotone_on_random_cells() {
    let cx = build_filtration(random_grid([9, 8, 7], 77, None)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5000 {
        let id = CellId(rng.random_range(0..cx.cell_count() as u32));
        for f in cx.boundary(id) {
            assert!(cx.value(f) <= cx.value(id));
        }
    }
}

#[test]
fn ball_is_contractible() {
    let res = 64;
    let h = 1.0 / (res - 1) as f64;
    let ball = SdfScene::ball(v(0.0, 0.0, 0.0), 0.3).unwrap();
    let pd = persistence_of(&ball, res);
    let essential: Vec<_> = pd.pairs().iter().filter(|p| p.is_essential()).collect();
    assert_eq!(essential.len(), 1);
    assert_eq!(essential[0].dim, 0);
    assert!((essential[0].birth + 0.3).abs() <= h, "{}", essential[0].birth);
    let straddling = pd
        .pairs()
        .iter()
        .filter(|p| p.dim >= 1 && p.birth <= 0.0 && 0.0 < p.death && p.persistence() > 2.0 * h)
        .count();
    assert_eq!(straddling, 0);
    assert_eq!(pd.betti_at(0.0), [1, 0, 0]);

    // the oracle agrees at a size it can handle
    let g16 = rasterize(&ball, [16; 3], default_bounds()).unwrap();
    let cx = build_filtration(g16).unwrap();
    assert_eq!(compute_persistence(&cx), compute_persistence_naive(&cx).unwrap());
}

#[test]
fn torus_loop_matches_analytic_pair() {
    let res = 64;
    let h = 1.0 / (res - 1) as f64;
    let pd = persistence_of(&torus(), res);
    let (b, d) = dominant_loop(&pd);
    assert!((b + 0.1).abs() <= 2.0 * h, "birth {b}");
    assert!((d - 0.15).abs() <= 2.0 * h, "death {d}");
    assert_eq!(betti_at(&pd, 0.0), [1, 1, 0]);
}

#[test]
fn torus_cross_checked_by_oracle() {
    // 23^3 is the largest cube grid under the oracle's cell guard
    let g = rasterize(&torus(), [23; 3], default_bounds()).unwrap();
    let cx = build_filtration(g).unwrap();
    let naive = compute_persistence_naive(&cx).unwrap();
    assert_eq!(compute_persistence(&cx), naive);
    let (b, d) = dominant_loop(&naive);
    let h = 1.0 / 22.0;
    assert!((b + 0.1).abs() <= 2.0 * h && (d - 0.15).abs() <= 2.0 * h, "({b}, {d})");
}

#[test]
fn betti_examples_at_zero() {
    let two_balls = SdfScene::union(vec![
        SdfScene::ball(v(-0.2, 0.0, 0.0), 0.12).unwrap(),
        SdfScene::ball(v(0.2, 0.0, 0.0), 0.12).unwrap(),
    ])
    .unwrap();
    let shell = SdfScene::subtraction(
        SdfScene::ball(v(0.0, 0.0, 0.0), 0.35).unwrap(),
        SdfScene::ball(v(0.0, 0.0, 0.0), 0.2).unwrap(),
    );
    assert_eq!(persistence_of(&two_balls, 40).betti_at(0.0), [2, 0, 0]);
    assert_eq!(persistence_of(&shell, 40).betti_at(0.0), [1, 0, 1]);
}

#[test]
fn euler_characteristic_examples() {
    let cx = build_filtration(rasterize(&torus(), [40; 3], default_bounds()).unwrap()).unwrap();
    assert_eq!(euler_characteristic_at(&cx, 0.0), 0);
    assert_eq!(euler_characteristic_at(&cx, 10.0), 1);
}

#[test]
fn disjoint_union_adds_betti_numbers() {
    let a = SdfScene::torus(v(-0.22, 0.0, 0.0), v(0.0, 0.0, 1.0), 0.13, 0.05).unwrap();
    let b = SdfScene::subtraction(
        SdfScene::ball(v(0.24, 0.0, 0.0), 0.2).unwrap(),
        SdfScene::ball(v(0.24, 0.0, 0.0), 0.1).unwrap(),
    );
    let both = SdfScene::union(vec![a.clone(), b.clone()]).unwrap();
    let res = 56;
    let ba = persistence_of(&a, res).betti_at(0.0);
    let bb = persistence_of(&b, res).betti_at(0.0);
    let bu = persistence_of(&both, res).betti_at(0.0);
    assert_eq!(bu, [ba[0] + bb[0], ba[1] + bb[1], ba[2] + bb[2]]);
    assert_eq!(bu, [2, 1, 1]);
}

fn grid_strategy() -> impl Strategy<Value = VolumeGrid<f64>> {
    (2usize..7, 2usize..7, 2usize..7).prop_flat_map(|(a, b, c)| {
        prop::collection::vec(-1.0f64..1.0, a * b * c)
            .prop_map(move |vals| VolumeGrid::new([a, b, c], default_bounds(), vals).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_poincare_holds(grid in grid_strategy(), t in -1.2f64..1.2) {
        let cx = build_filtration(grid).unwrap();
        let b = compute_persistence(&cx).betti_at_all(t);
        let alternating = b[0] as i64 - b[1] as i64 + b[2] as i64 - b[3] as i64;
        prop_assert_eq!(euler_characteristic_at(&cx, t), alternating);
    }

    #[test]
    fn shift_moves_every_pair(grid in grid_strategy(), c in -2.0f64..2.0) {
        // dyadic shift keeps the value order and the arithmetic exact
        let c = (c * 8.0).round() / 8.0;
        let base = compute_persistence(&build_filtration(grid.clone()).unwrap());
        let shifted = compute_persistence(&build_filtration(grid.map(|x| x + c).unwrap()).unwrap());
        prop_assert_eq!(base.pairing(), shifted.pairing());
        for (p, q) in base.pairs().iter().zip(shifted.pairs()) {
            prop_assert_eq!(p.birth + c, q.birth);
            prop_assert_eq!(p.death + c, q.death);
        }
    }

    #[test]
    fn positive_scale_multiplies_every_pair(grid in grid_strategy(), k in 0i32..6) {
        let lambda = 2f64.powi(k - 2);
        let base = compute_persistence(&build_filtration(grid.clone()).unwrap());
        let scaled = compute_persistence(&build_filtration(grid.map(|x| x * lambda).unwrap()).unwrap());
        prop_assert_eq!(base.pairing(), scaled.pairing());
        for (p, q) in base.pairs().iter().zip(scaled.pairs()) {
            prop_assert_eq!(p.birth * lambda, q.birth);
            prop_assert_eq!(p.death * lambda, q.death);
        }
    }

    #[test]
    fn fast_equals_naive(grid in grid_strategy()) {
        let cx = build_filtration(grid).unwrap();
        prop_assert_eq!(compute_persistence(&cx), compute_persistence_naive(&cx).unwrap());
    }
}
