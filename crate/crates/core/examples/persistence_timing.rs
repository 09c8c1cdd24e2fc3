//! Times persistence of a solid torus volume: `cargo run --release --example persistence_timing -- 128`

use std::time::Instant;

use topoforge::cubical::{build_filtration, compute_persistence_with, ReductionOptions};
use topoforge::field::{default_bounds, rasterize, SdfScene};
use topoforge::geom::Vec3;

fn main() {
    let res: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let torus = SdfScene::torus(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 0.25f32, 0.1).unwrap();
    let t0 = Instant::now();
    let grid = rasterize(&torus, [res; 3], default_bounds()).unwrap();
    let cx = build_filtration(grid).unwrap();
    let t1 = Instant::now();
    let (pd, stats) = compute_persistence_with(&cx, ReductionOptions::default());
    let t2 = Instant::now();
    let big: Vec<_> = pd.pairs().iter().filter(|p| p.dim <= 2 && p.persistence() > 0.02).collect();
    println!("res {res}: rasterize {:?}, persistence {:?}", t1 - t0, t2 - t1);
    println!("{stats:?}; pairs {}; betti(0) {:?}", pd.pairs().len(), pd.betti_at(0.0));
    for p in big {
        println!("  dim {} ({}, {})", p.dim, p.birth, p.death);
    }
}
