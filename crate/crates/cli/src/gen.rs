//! `gen`: rasterize presets and scene files into volume files plus a manifest.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use topoforge::field::{format_scene, normalize_scene, parse_scene, rasterize, Aabb, SdfScene};

use crate::common::{in_file, read_text, run_pool, sha256_hex, stem, write_atomic, write_json, CliError, CliResult, Provenance};
use crate::presets::{preset, random_csg, FIXED_PRESETS, PRESET_NAMES};

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Named preset; repeatable. `all` expands to the six fixed presets.
    #[arg(long = "preset", value_name = "NAME")]
    pub presets: Vec<String>,
    /// Scene description file; repeatable.
    #[arg(long = "scene", value_name = "FILE")]
    pub scenes: Vec<PathBuf>,
    /// Number of scenes for the `random-csg` preset.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    /// Cube bounds `LO,HI` of the raster.
    #[arg(long, default_value = "-0.5,0.5", value_parser = parse_bounds)]
    pub bounds: (f64, f64),
    /// Fit each scene to [-0.4, 0.4]^3 before rasterizing.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err("need finite LO < HI".into());
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct GenConfig {
    command: &'static str,
    /// `(name, scene text)` of every volume.
    volumes: Vec<(String, String)>,
    res: usize,
    bounds: (f64, f64),
    normalize: bool,
}

#[derive(Serialize)]
struct VolumeEntry {
    name: String,
    volume: String,
    scene: String,
    dims: [usize; 3],
    /// Betti numbers at t = 0; known only for fixed presets.
    betti: Option<[usize; 3]>,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    #[serde(flatten)]
    provenance: Provenance,
    resolution: usize,
    bounds: (f64, f64),
    normalized: bool,
    volumes: Vec<VolumeEntry>,
}

struct Job {
    name: String,
    scene: SdfScene<f64>,
    betti: Option<[usize; 3]>,
}

fn jobs(args: &GenArgs) -> CliResult<Vec<Job>> {
    let mut out = Vec::new();
    for p in &args.presets {
        match p.as_str() {
            "all" => {
                for name in FIXED_PRESETS {
                    let (scene, betti) = preset(name).expect("fixed preset");
                    out.push(Job { name: name.into(), scene, betti: Some(betti) });
                }
            }
            "random-csg" => {
                for i in 0..args.count {
                    out.push(Job {
                        name: format!("random-csg-{i:03}"),
                        scene: random_csg(args.seed, i as u64),
                        betti: None,
                    });
                }
            }
            name => {
                let (scene, betti) = preset(name).ok_or_else(|| {
                    CliError::Usage(format!("unknown preset '{name}' (known: {}, all)", PRESET_NAMES.join(", ")))
                })?;
                out.push(Job { name: name.into(), scene, betti: Some(betti) });
            }
        }
    }
    for path in &args.scenes {
        let scene = parse_scene(&read_text(path)?).map_err(|e| in_file(path, e))?;
        out.push(Job { name: stem(path), scene, betti: None });
    }
    if out.is_empty() {
        return Err(CliError::Usage("nothing to generate: give --preset or --scene".into()));
    }
    let mut names: Vec<&str> = out.iter().map(|j| j.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Usage(format!("duplicate volume name '{}'", w[0])));
    }
    Ok(out)
}

fn render(job: &Job, args: &GenArgs, prov: &Provenance, out: &Path) -> CliResult<VolumeEntry> {
    let scene = if args.normalize {
        normalize_scene(&job.scene).map_err(|e| CliError::Usage(format!("{}: {e}", job.name)))?
    } else {
        job.scene.clone()
    };
    let dims = [args.res; 3];
    let grid = rasterize(&scene, dims, Aabb::cube(args.bounds.0, args.bounds.1))?;
    let bytes = grid.to_raw().to_bytes();
    let volume = format!("{}.vgrd", job.name);
    let scene_file = format!("{}.scene", job.name);
    write_atomic(&out.join(&volume), &bytes)?;
    let text = format!("; {}\n{}", prov.line(), format_scene(&scene));
    write_atomic(&out.join(&scene_file), text.as_bytes())?;
    Ok(VolumeEntry {
        name: job.name.clone(),
        volume,
        scene: scene_file,
        dims,
        betti: job.betti,
        sha256: sha256_hex(&bytes),
    })
}

pub fn run(args: &GenArgs, threads: usize) -> CliResult<()> {
    if args.res < 2 {
        return Err(CliError::Usage("--res must be at least 2".into()));
    }
    let jobs = jobs(args)?;
    let config = GenConfig {
        command: "gen",
        volumes: jobs.iter().map(|j| (j.name.clone(), format_scene(&j.scene))).collect(),
        res: args.res,
        bounds: args.bounds,
        normalize: args.normalize,
    };
    let prov = Provenance::new(args.seed, &config);
    let results = run_pool(&jobs, threads, |job| render(job, args, &prov, &args.out));
    let volumes = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let manifest = Manifest {
        provenance: prov,
        resolution: args.res,
        bounds: args.bounds,
        normalized: args.normalize,
        volumes,
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    for v in &manifest.volumes {
        println!("{}", args.out.join(&v.volume).display());
    }
    Ok(())
}
