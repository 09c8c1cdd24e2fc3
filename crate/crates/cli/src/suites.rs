//! Invariant suites run by `verify` and `verify-kernels`.
//!
//! Every check is seeded and reports only deterministic numbers, so two runs with
//! the same seed produce identical reports.

use ndarray::{s, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use topoforge::cubical::{
    build_filtration, compute_persistence, compute_persistence_naive, compute_persistence_with, euler_characteristic_at, Fault,
    ReductionOptions,
};
use topoforge::field::{default_bounds, rasterize, SdfScene, VolumeGrid};
use topoforge::geom::Vec3;
use topoforge::latentnet::*;
use topoforge::metrics::{chamfer, emd, fid, one_nna, FeatureStats, PointSet, SetRole, ShapeDistance, ShapeSet};
use topoforge::pd::{bottleneck_distance, to_points, PersistencePoint, PersistencePointSet};

use crate::presets::{preset, random_csg, FIXED_PRESETS};

/// Failing cases kept per check.
const MAX_REPLAYS: usize = 5;

pub const SUITE_NAMES: [&str; 7] = ["oracle", "euler", "stability", "betti", "kernels", "sampler", "metrics"];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    pub detail: String,
    /// Failing cases with everything needed to rebuild them.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(name: &str, checks: Vec<Check>) -> Self {
        SuiteReport {
            name: name.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

/// Collects cases for one check.
struct Tally {
    name: &'static str,
    cases: usize,
    failed: usize,
    failures: Vec<Value>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failed: 0, failures: Vec::new() }
    }

    fn case(&mut self, ok: bool, replay: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_REPLAYS {
                self.failures.push(replay());
            }
        }
    }

    fn finish(self, detail: String) -> Check {
        let detail = if self.failed > 0 {
            format!("{} of {} cases failed; {detail}", self.failed, self.cases)
        } else {
            detail
        };
        Check {
            name: self.name.into(),
            cases: self.cases,
            passed: self.failed == 0,
            detail,
            failures: self.failures,
        }
    }
}

fn single(name: &'static str, ok: bool, detail: String, replay: Value) -> Check {
    let mut t = Tally::new(name);
    t.case(ok, || replay);
    t.finish(detail)
}

fn sub_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ salt
}

// ---------------------------------------------------------------- topology

/// Seeded random grid for the oracle suite; every third case uses 4 integer levels to
/// force ties.
pub fn oracle_grid(seed: u64, case: u64) -> (VolumeGrid<f64>, Option<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, case));
    let dims = [rng.random_range(4..=8), rng.random_range(4..=8), rng.random_range(4..=8)];
    let levels = case.is_multiple_of(3).then_some(4);
    let grid = VolumeGrid::from_fn(dims, default_bounds(), |_, _, _| match levels {
        Some(l) => rng.random_range(0..l) as f64,
        None => rng.random::<f64>(),
    })
    .expect("dims >= 4");
    (grid, levels)
}

pub fn oracle_suite(seed: u64, fault: Option<Fault>) -> SuiteReport {
    let opts = ReductionOptions { clearing: true, fault };
    let mut t = Tally::new("fast-equals-naive");
    let mut pairs = 0;
    for case in 0..100u64 {
        let (grid, levels) = oracle_grid(seed, case);
        let dims = grid.dims();
        let cx = build_filtration(grid).expect("valid grid");
        let fast = compute_persistence_with(&cx, opts).0;
        let naive = compute_persistence_naive(&cx).expect("under the oracle guard");
        pairs += naive.pairs().len();
        t.case(fast == naive, || {
            json!({
                "seed": seed,
                "case": case,
                "dims": dims,
                "levels": levels,
                "fast_pairs": fast.pairs().len(),
                "naive_pairs": naive.pairs().len(),
                "values": cx.grid().values(),
            })
        });
    }
    let check = t.finish(format!("100 grids 4^3..8^3, {pairs} pairs compared"));
    SuiteReport::new("oracle", vec![check])
}

pub fn euler_suite(seed: u64) -> SuiteReport {
    let mut t = Tally::new("euler-poincare");
    for i in 0..20u64 {
        let scene = random_csg(seed, i);
        let grid = rasterize(&scene, [32; 3], default_bounds()).expect("valid raster");
        let (lo, hi) = (grid.min_value(), grid.max_value());
        let cx = build_filtration(grid).expect("valid grid");
        let pd = compute_persistence(&cx);
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 1000 + i));
        for _ in 0..10 {
            let th = rng.random_range(lo..=hi);
            let b = pd.betti_at_all(th);
            let alternating = b[0] as i64 - b[1] as i64 + b[2] as i64 - b[3] as i64;
            let chi = euler_characteristic_at(&cx, th);
            t.case(chi == alternating, || {
                json!({ "seed": seed, "scene_index": i, "threshold": th, "euler": chi, "betti": b,
                        "scene": topoforge::field::format_scene(&scene) })
            });
        }
    }
    SuiteReport::new("euler", vec![t.finish("20 random CSG scenes at 32^3, 10 thresholds each".into())])
}

fn stability_scene() -> SdfScene<f64> {
    SdfScene::union(vec![
        SdfScene::torus(Vec3::new(-0.15, 0.0, 0.0), Vec3::new(0.0, 1.0, 1.0), 0.18, 0.06).expect("valid torus"),
        SdfScene::ball(Vec3::new(0.25, 0.1, 0.0), 0.12).expect("valid ball"),
    ])
    .expect("non-empty union")
}

fn capped(grid: VolumeGrid<f64>, dim: usize) -> Vec<(f64, f64)> {
    let pd = compute_persistence(&build_filtration(grid).expect("valid grid")).without_zero_persistence();
    to_points(&pd, dim).expect("dim <= 2").birth_death()
}

pub fn stability_suite(seed: u64) -> SuiteReport {
    let base = rasterize(&stability_scene(), [16; 3], default_bounds()).expect("valid raster");
    let base_points: Vec<_> = (0..3).map(|d| capped(base.clone(), d)).collect();
    let mut checks = Vec::new();
    for (k, eps) in [(0u64, 0.005), (1, 0.01)] {
        let mut t = Tally::new(if k == 0 { "bottleneck-eps-0.005" } else { "bottleneck-eps-0.01" });
        let mut worst: f64 = 0.0;
        for p in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 2000 + 100 * k + p));
            let hit = rng.random_range(0..base.len());
            let vals: Vec<f64> = base
                .values()
                .iter()
                .enumerate()
                .map(|(j, &v)| v + if j == hit { eps } else { rng.random_range(-eps..=eps) })
                .collect();
            let g = VolumeGrid::new(base.dims(), *base.bounds(), vals).expect("same shape");
            for (dim, a) in base_points.iter().enumerate() {
                let b = capped(g.clone(), dim);
                let d = bottleneck_distance(a, &b).expect("small diagrams");
                worst = worst.max(d / eps);
                t.case(d <= eps + 1e-9, || {
                    json!({ "seed": seed, "eps": eps, "perturbation": p, "dim": dim, "bottleneck": d })
                });
            }
        }
        checks.push(t.finish(format!("20 perturbations x dims 0..2 at 16^3, max d/eps = {worst:.4}")));
    }
    SuiteReport::new("stability", checks)
}

/// Largest-persistence dim-1 pair of the torus preset at `res`.
pub fn torus_loop(res: usize) -> (f64, f64) {
    let (scene, _) = preset("torus").expect("fixed preset");
    let grid = rasterize(&scene, [res; 3], default_bounds()).expect("valid raster");
    let pd = compute_persistence(&build_filtration(grid).expect("valid grid"));
    let p = pd
        .pairs_of_dim(1)
        .max_by(|a, b| a.persistence().total_cmp(&b.persistence()))
        .expect("torus has a loop");
    (p.birth, p.death)
}

pub fn betti_suite(res: usize) -> SuiteReport {
    let mut t = Tally::new("preset-betti-at-zero");
    let mut seen = Vec::new();
    for name in FIXED_PRESETS {
        let (scene, truth) = preset(name).expect("fixed preset");
        let grid = rasterize(&scene, [res; 3], default_bounds()).expect("valid raster");
        let got = compute_persistence(&build_filtration(grid).expect("valid grid")).betti_at(0.0);
        seen.push(format!("{name}={}{}{}", got[0], got[1], got[2]));
        t.case(got == truth, || json!({ "preset": name, "res": res, "expected": truth, "found": got }));
    }
    let mut checks = vec![t.finish(format!("{res}^3: {}", seen.join(" ")))];

    let h = 1.0 / (res - 1) as f64;
    let (b, d) = torus_loop(res);
    let (eb, ed) = ((b + 0.1).abs(), (d - 0.15).abs());
    checks.push(single(
        "torus-loop-pair",
        eb <= 2.0 * h && ed <= 2.0 * h,
        format!("({b:.5}, {d:.5}) vs (-0.1, 0.15), errors {:.2}h {:.2}h", eb / h, ed / h),
        json!({ "res": res, "birth": b, "death": d }),
    ));
    SuiteReport::new("betti", checks)
}

// ---------------------------------------------------------------- kernels

fn max_abs(a: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn uniform(rng: &mut ChaCha8Rng, shape: (usize, usize), lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn(shape, || rng.random_range(lo..hi))
}

fn zero_condition() -> ConditionVector<f64> {
    ConditionVector::external(Array1::zeros(CONDITION_WIDTH)).expect("256 entries")
}

pub fn kernel_checks(params: &AttentionParams<f64>, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 3000));
    let mut out = Vec::new();
    let width = params.config.width;

    let zero = Array2::<f64>::zeros((4, BOTTLENECK_WIDTH));
    let ones = Array2::<f64>::ones((4, BOTTLENECK_WIDTH));
    let k0 = kl_loss(&zero, &zero).expect("matching shapes");
    let k1 = kl_loss(&ones, &zero).expect("matching shapes");
    let k2 = kl_loss(&zero, &ones).expect("matching shapes");
    let e = (std::f64::consts::E - 1.0) / 2.0;
    out.push(single(
        "kl-value",
        k0 == 0.5 && k1 == 1.0 && (k2 - e).abs() < 1e-14,
        format!("KL(0,0) = {k0}, KL(1,0) = {k1}, KL(0,1) = {k2:.6}"),
        json!({ "kl_zero": k0, "kl_mu_one": k1, "kl_logvar_one": k2 }),
    ));

    let h = 1e-5;
    let mut t = Tally::new("kl-gradient");
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let mu = uniform(&mut rng, (3, 4), -2.0, 2.0);
        let lv = uniform(&mut rng, (3, 4), -3.0, 3.0);
        let (gm, gl) = kl_loss_grad(&mu, &lv).expect("matching shapes");
        let mut err: f64 = 0.0;
        for idx in [(0, 0), (1, 2), (2, 3)] {
            let (mut up, mut dn) = (mu.clone(), mu.clone());
            up[idx] += h;
            dn[idx] -= h;
            let fd = (kl_loss(&up, &lv).unwrap() - kl_loss(&dn, &lv).unwrap()) / (2.0 * h);
            err = err.max((fd - gm[idx]).abs());
            let (mut up, mut dn) = (lv.clone(), lv.clone());
            up[idx] += h;
            dn[idx] -= h;
            let fd = (kl_loss(&mu, &up).unwrap() - kl_loss(&mu, &dn).unwrap()) / (2.0 * h);
            err = err.max((fd - gl[idx]).abs());
        }
        worst = worst.max(err);
        t.case(err < 1e-6, || json!({ "seed": seed, "case": case, "mu": rows(&mu), "logvar": rows(&lv), "error": err }));
    }
    out.push(t.finish(format!("central differences h = 1e-5, max error {worst:.2e}")));

    let b_half = bce_loss(&[1.0], &[0.5]).expect("same length");
    let b_floor = bce_loss(&[1.0; 8], &[1.0; 8]).expect("same length");
    out.push(single(
        "bce-value",
        (b_half - std::f64::consts::LN_2).abs() < 1e-15 && b_floor <= 1.1e-7,
        format!("BCE(1, 0.5) = {b_half:.12}, BCE(1, 1) = {b_floor:.3e}"),
        json!({ "bce_half": b_half, "bce_floor": b_floor }),
    ));

    let mut t = Tally::new("bce-gradient");
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.random_range(1..10);
        let o: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
        let g = bce_loss_grad(&o, &p).expect("same length");
        let mut err: f64 = 0.0;
        for i in 0..n {
            let (mut up, mut dn) = (p.clone(), p.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (bce_loss(&o, &up).unwrap() - bce_loss(&o, &dn).unwrap()) / (2.0 * h);
            err = err.max((fd - g[i]).abs());
        }
        worst = worst.max(err);
        t.case(err < 1e-6, || json!({ "seed": seed, "case": case, "o": o, "o_hat": p, "error": err }));
    }
    out.push(t.finish(format!("central differences h = 1e-5, max error {worst:.2e}")));

    let mut t = Tally::new("attention-row-sums");
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let n = rng.random_range(2..40);
        let m = rng.random_range(1..=n);
        let full = uniform(&mut rng, (n, 3), -0.5, 0.5);
        let q = uniform(&mut rng, (m, 3), -0.5, 0.5);
        let w = cross_attention_weights(&full, &q, params).expect("m <= n");
        let lat = uniform(&mut rng, (m, width), -1.0, 1.0);
        let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let qw = query_weights(x, &lat, params).expect("matching width");
        let err = max_abs(w.rows().into_iter().map(|r| r.sum() - 1.0).chain([qw.sum() - 1.0]));
        worst = worst.max(err);
        t.case(err <= 1e-9, || json!({ "seed": seed, "case": case, "n": n, "m": m, "error": err }));
    }
    out.push(t.finish(format!("cross-attention and query weights, max |sum - 1| = {worst:.2e}")));

    let mut t = Tally::new("self-attention-equivariance");
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let n = rng.random_range(2..12);
        let x = uniform(&mut rng, (n, width), -1.0, 1.0);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let y = self_attention_stack(&x, params, params.layers.len()).expect("valid layers");
        let yp = self_attention_stack(&x.select(Axis(0), &perm), params, params.layers.len()).expect("valid layers");
        let err = max_abs((&y.select(Axis(0), &perm) - &yp).iter().copied());
        worst = worst.max(err);
        t.case(err <= 1e-9, || json!({ "seed": seed, "case": case, "perm": perm, "error": err }));
    }
    out.push(t.finish(format!("row permutations, max error {worst:.2e}")));

    let mut t = Tally::new("topo-permutation-invariance");
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let real_count = rng.random_range(0..=TOPO_TOKENS);
        let mut g = uniform(&mut rng, (TOPO_TOKENS, 2), -0.5, 0.5);
        let real: Vec<bool> = (0..TOPO_TOKENS).map(|i| i < real_count).collect();
        let base = topo_encode_rows(&g, &real, params).expect("16 rows");
        let mut perm: Vec<usize> = (0..TOPO_TOKENS).collect();
        for i in (1..TOPO_TOKENS).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let real_p: Vec<bool> = perm.iter().map(|&i| real[i]).collect();
        let permuted = topo_encode_rows(&g.select(Axis(0), &perm), &real_p, params).expect("16 rows");
        let err = max_abs(base.values().iter().zip(permuted.values()).map(|(a, b)| a - b));
        // pad rows are masked, so their contents must not matter
        g.slice_mut(s![real_count.., ..]).fill(7.0);
        let masked = topo_encode_rows(&g, &real, params).expect("16 rows") == base;
        worst = worst.max(err);
        t.case(err <= 1e-9 && masked, || {
            json!({ "seed": seed, "case": case, "real": real_count, "perm": perm, "error": err, "pads_masked": masked })
        });
    }
    let pads = PersistencePointSet::new(1, vec![PersistencePoint::padding(); TOPO_TOKENS]).expect("valid points");
    let all_pad = topo_encode(&pads, params).expect("16 rows");
    t.case(*all_pad.values() == params.topo.head_bias, || json!({ "case": "all-pad" }));
    out.push(t.finish(format!("random permutations incl. pad rows, max error {worst:.2e}")));

    let rows: Vec<_> = (0..BETTI_TABLE_ROWS).map(|b| betti_embed(b, params).expect("in range")).collect();
    let distinct = rows.iter().enumerate().all(|(i, a)| rows[i + 1..].iter().all(|b| a.values() != b.values()));
    let rejects = betti_embed(BETTI_TABLE_ROWS, params).is_err();
    out.push(single(
        "betti-embedding",
        distinct && rejects,
        format!("{BETTI_TABLE_ROWS} distinct rows, beta1 = {BETTI_TABLE_ROWS} rejected: {rejects}"),
        json!({ "distinct": distinct, "rejects_out_of_range": rejects }),
    ));

    let c = zero_condition();
    let z = uniform(&mut rng, (8, BOTTLENECK_WIDTH), -1.0, 1.0);
    let mut t = Tally::new("edm-oracle-denoiser");
    for s in 0..50u64 {
        let sigma = NoiseLevel::new(0.1 + s as f64).expect("positive");
        let zz = z.clone();
        let oracle = move |_: &Array2<f64>, _: f64, _: &ConditionVector<f64>| zz.clone();
        let loss = edm_loss(&z, sigma, sub_seed(seed, s), oracle, &c, EdmNorm::Euclidean).expect("valid shapes");
        t.case(loss == 0.0, || json!({ "seed": seed, "noise_seed": s, "loss": loss }));
    }
    out.push(t.finish("D(z + n) = z gives loss exactly 0 for 50 noise seeds".into()));

    let z1 = Array2::<f64>::zeros((1, BOTTLENECK_WIDTH));
    let sigma = NoiseLevel::new(0.5).expect("positive");
    let ident = |x: &Array2<f64>, _: f64, _: &ConditionVector<f64>| x.clone();
    let mean = (0..10_000u64)
        .map(|s| edm_loss(&z1, sigma, sub_seed(seed, 10_000 + s), ident, &c, EdmNorm::Euclidean).expect("valid"))
        .sum::<f64>()
        / 1e4;
    let oracle = 0.5 * chi_mean(BOTTLENECK_WIDTH);
    out.push(single(
        "edm-identity-chi-mean",
        (mean / oracle - 1.0).abs() < 0.02,
        format!("mean loss {mean:.4} vs sigma * chi_32 mean {oracle:.4}"),
        json!({ "mean": mean, "oracle": oracle }),
    ));

    let (manifest, blob) = params.to_files("params.bin").expect("f32-representable params");
    let back = AttentionParams::<f64>::from_files(&manifest, &blob).map(|(p, _)| p);
    let same = back.as_ref().is_ok_and(|p| p == params);
    out.push(single(
        "params-roundtrip",
        same,
        format!("{} bytes of tensors round-trip bit-exactly: {same}", blob.len()),
        json!({ "blob_bytes": blob.len() }),
    ));

    let run = |p: &AttentionParams<f64>| -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 4000));
        let pts = uniform(&mut rng, (128, 3), -0.4, 0.4);
        let sub = downsample(&pts, p.config.latent_count, seed).expect("m <= n");
        let f = cross_attention_encode(&pts, &sub, p).expect("valid shapes");
        let lat = kl_bottleneck(&f, p, seed).expect("valid shapes");
        let hh = self_attention_stack(&lift_latents(&lat.z, p).expect("valid"), p, p.layers.len()).expect("valid");
        let fx = query_interpolate([0.1, 0.0, -0.2], &hh, p).expect("valid");
        let o = occupancy_head(fx.view(), p).expect("valid");
        fx.iter().chain([&o]).map(|v| v.to_bits()).collect()
    };
    let a = run(params);
    let b = run(params);
    out.push(single(
        "pipeline-determinism",
        a == b,
        format!("encode, bottleneck, self-attention, query, head: {} outputs bit-identical", a.len()),
        json!({}),
    ));
    out
}

/// Mean of a chi variable with `k` degrees of freedom, `√2 Γ((k+1)/2) / Γ(k/2)`.
pub fn chi_mean(k: usize) -> f64 {
    // r(k) = Γ((k+1)/2) / Γ(k/2) with r(1) = 1/√π, r(2) = √π/2, r(k+2) = r(k) (k+1)/k
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let (mut at, mut r) = if k % 2 == 1 { (1, 1.0 / sqrt_pi) } else { (2, sqrt_pi / 2.0) };
    while at < k {
        r *= (at as f64 + 1.0) / at as f64;
        at += 2;
    }
    std::f64::consts::SQRT_2 * r
}

fn gaussian_denoiser(x: &Array2<f64>, s: f64, _: &ConditionVector<f64>) -> Array2<f64> {
    x / (1.0 + s * s)
}

pub fn sampler_checks(seed: u64) -> Vec<Check> {
    let c = zero_condition();
    let mut out = Vec::new();
    let ident = |x: &Array2<f64>, _: f64, _: &ConditionVector<f64>| x.clone();
    let fixed = edm_sample(ident, &c, (4, BOTTLENECK_WIDTH), 10, DEFAULT_SIGMA_MIN, DEFAULT_SIGMA_MAX, seed).expect("valid");
    let expect = standard_normal::<f64>((4, BOTTLENECK_WIDTH), seed) * DEFAULT_SIGMA_MAX;
    out.push(single(
        "identity-fixed-point",
        fixed == expect,
        "D(x) = x leaves the initial draw unchanged".into(),
        json!({ "seed": seed }),
    ));

    let x = edm_sample(
        gaussian_denoiser,
        &c,
        (10_000, BOTTLENECK_WIDTH),
        64,
        DEFAULT_SIGMA_MIN,
        DEFAULT_SIGMA_MAX,
        sub_seed(seed, 5000),
    )
    .expect("valid");
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let var = x.var_axis(Axis(0), 0.0);
    let worst_mean = max_abs(mean.iter().copied());
    let (vmin, vmax) = var.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    out.push(single(
        "gaussian-moments",
        worst_mean < 0.05 && vmin >= 0.95 && vmax <= 1.05,
        format!("10^4 x 32 samples, 64 steps: max |mean| {worst_mean:.4}, variance in [{vmin:.4}, {vmax:.4}]"),
        json!({ "seed": seed, "max_abs_mean": worst_mean, "var_min": vmin, "var_max": vmax }),
    ));

    let run = |steps| {
        edm_sample(gaussian_denoiser, &c, (64, BOTTLENECK_WIDTH), steps, DEFAULT_SIGMA_MIN, DEFAULT_SIGMA_MAX, seed)
            .expect("valid")
    };
    let rms = |a: &Array2<f64>, b: &Array2<f64>| (a - b).mapv(|v| v * v).mean().expect("non-empty").sqrt();
    let (a, b, d) = (run(64), run(128), run(256));
    let (coarse, fine) = (rms(&a, &b), rms(&b, &d));
    out.push(single(
        "heun-second-order",
        fine < 1e-3 && (3.5..4.5).contains(&(coarse / fine)),
        format!("rms change 64->128 {coarse:.2e}, 128->256 {fine:.2e}, ratio {:.2}", coarse / fine),
        json!({ "seed": seed, "coarse": coarse, "fine": fine }),
    ));
    out
}

// ---------------------------------------------------------------- metrics

fn cloud(rng: &mut ChaCha8Rng, n: usize, offset: f64) -> PointSet<f64> {
    PointSet::new(
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.sample::<f64, _>(StandardNormal) + offset,
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                )
            })
            .collect(),
    )
    .expect("non-empty")
}

fn chamfer_brute(a: &PointSet<f64>, b: &PointSet<f64>) -> f64 {
    let dir = |x: &PointSet<f64>, y: &PointSet<f64>| {
        x.points()
            .iter()
            .map(|p| y.points().iter().map(|q| p.dist_squared(*q)).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / x.len() as f64
    };
    dir(a, b) + dir(b, a)
}

fn emd_brute(a: &PointSet<f64>, b: &PointSet<f64>) -> f64 {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for i in 0..n {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }
    let n = a.len();
    perms(n)
        .iter()
        .map(|p| (0..n).map(|i| a.points()[i].dist_squared(b.points()[p[i]]).sqrt()).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        / n as f64
}

pub fn metrics_suite(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 6000));
    let mut checks = Vec::new();

    let mut t = Tally::new("chamfer-exact");
    for case in 0..50 {
        let (n, m) = (rng.random_range(1..200), rng.random_range(1..200));
        let a = cloud(&mut rng, n, 0.0);
        let b = cloud(&mut rng, m, 0.3);
        let (fast, slow) = (chamfer(&a, &b), chamfer_brute(&a, &b));
        t.case(fast == slow, || json!({ "seed": seed, "case": case, "fast": fast, "brute": slow }));
    }
    checks.push(t.finish("kd-tree path equals the O(nm) scan bit for bit on 50 pairs".into()));

    let mut t = Tally::new("emd-exact");
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = rng.random_range(1..=6);
        let a = cloud(&mut rng, n, 0.0);
        let b = cloud(&mut rng, n, 0.5);
        let (fast, slow) = (emd(&a, &b).expect("equal sizes"), emd_brute(&a, &b));
        let err = (fast - slow).abs() / slow.max(1e-300);
        worst = worst.max(err);
        t.case(err <= 1e-12, || json!({ "seed": seed, "case": case, "n": n, "hungarian": fast, "brute": slow }));
    }
    checks.push(t.finish(format!("Hungarian vs factorial enumeration, n <= 6, max rel. error {worst:.1e}")));

    let shape_set = |role, shapes| ShapeSet::new(role, shapes).expect("non-empty");
    let g = shape_set(SetRole::Generated, (0..6).map(|_| cloud(&mut rng, 12, 0.0)).collect());
    let r = shape_set(SetRole::Reference, (0..5).map(|_| cloud(&mut rng, 12, 100.0)).collect());
    let far = one_nna(&g, &r, ShapeDistance::Chamfer).expect("sets of >= 2");
    checks.push(single("nna-far-clusters", far == 1.0, format!("1-NNA = {far}"), json!({ "seed": seed, "value": far })));

    let mut total = 0.0;
    for s in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 7000 + s));
        let g = shape_set(SetRole::Generated, (0..200).map(|_| cloud(&mut rng, 16, 0.0)).collect());
        let r = shape_set(SetRole::Reference, (0..200).map(|_| cloud(&mut rng, 16, 0.0)).collect());
        total += one_nna(&g, &r, ShapeDistance::Chamfer).expect("sets of >= 2");
    }
    let mean = total / 10.0;
    checks.push(single(
        "nna-same-distribution",
        (mean - 0.5).abs() <= 0.05,
        format!("200 + 200 shapes, 10 seeds: mean 1-NNA = {mean:.4}"),
        json!({ "seed": seed, "mean": mean }),
    ));

    let mut t = Tally::new("fid-mean-shift");
    let d = 8;
    for case in 0..20 {
        let a = Array2::from_shape_simple_fn((d, d + 2), || rng.sample::<f64, _>(StandardNormal));
        let mut cov = a.dot(&a.t()) / d as f64;
        for i in 0..d {
            for j in 0..i {
                cov[[j, i]] = cov[[i, j]];
            }
        }
        let mu = Array1::from_shape_simple_fn(d, || rng.sample::<f64, _>(StandardNormal));
        let shift = Array1::from_shape_simple_fn(d, || rng.sample::<f64, _>(StandardNormal));
        let sa = FeatureStats::new(mu.clone(), cov.clone(), None).expect("valid stats");
        let sb = FeatureStats::new(&mu + &shift, cov, None).expect("valid stats");
        let expect = shift.dot(&shift);
        let got = fid(&sa, &sb).expect("same dim");
        let same = fid(&sa, &sa).expect("same dim");
        t.case((got - expect).abs() <= 1e-9 * expect && same.abs() <= 1e-8, || {
            json!({ "seed": seed, "case": case, "fid": got, "expected": expect, "fid_self": same })
        });
    }
    checks.push(t.finish("FID(N(mu, S), N(mu + d, S)) = |d|^2 to 1e-9 relative".into()));
    SuiteReport::new("metrics", checks)
}
