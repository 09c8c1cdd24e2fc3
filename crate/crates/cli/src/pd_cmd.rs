//! `pd`: truncation, editing and vectorization of diagrams.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use topoforge::cubical::{DiagramTable, TSV_MAGIC};
use topoforge::pd::{
    image_to_raw, landscape_to_tsv, linspace, persistence_image, persistence_landscape, table_to_points,
    PersistenceImageParams, PersistencePointSet, PiRange, PiWeight, DEFAULT_PI_SIGMA, DEFAULT_TOP_K,
};

use crate::common::{in_file, read_text, sha256_hex, stem, write_atomic, write_json, CliError, CliResult, Provenance};

#[derive(Debug, Args)]
pub struct PdArgs {
    #[command(subcommand)]
    pub op: PdOp,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum PdOp {
    /// Keep the k most persistent points, padding to exactly k.
    Topk(TopkArgs),
    /// Move one point toward the diagonal.
    Edit(EditArgs),
    /// Persistence images over a shared window.
    Image(ImageArgs),
    /// Persistence landscape levels on a uniform grid.
    Landscape(LandscapeArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Diagram TSV (from `analyze`) or points TSV (from `pd topk`/`pd edit`).
    pub input: PathBuf,
    /// Homology dimension read from a diagram file.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TopkArgs {
    #[command(flatten)]
    pub src: Source,
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub k: usize,
    /// Drop essential classes (capped points) before truncating.
    #[arg(long)]
    pub exclude_capped: bool,
}

#[derive(Debug, Args)]
pub struct EditArgs {
    #[command(flatten)]
    pub src: Source,
    /// Position in the canonical order (persistence descending).
    #[arg(long)]
    pub index: usize,
    /// Fraction of the persistence removed, in [0, 1].
    #[arg(long)]
    pub factor: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightArg {
    Linear,
    Constant,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    /// Diagram or points files sharing one window.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Pixels `W` or `WxH` (birth x persistence).
    #[arg(long, default_value = "32x32", value_parser = parse_res)]
    pub res: (usize, usize),
    #[arg(long, default_value_t = DEFAULT_PI_SIGMA)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = WeightArg::Linear)]
    pub weight: WeightArg,
    /// Window `B0,B1,P0,P1`; defaults to the extent of all inputs.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub range: Option<[f64; 4]>,
    /// Output directory for `<name>.pi.vgrd` and `<name>.pi.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub src: Source,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Sample window `LO,HI`; defaults to [min birth, max death].
    #[arg(long, value_parser = crate::gen::parse_bounds, allow_hyphen_values = true)]
    pub t_range: Option<(f64, f64)>,
}

fn parse_res(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad resolution '{s}'"));
    let (w, h) = match s.split_once('x') {
        Some((w, h)) => (parse(w)?, parse(h)?),
        None => (parse(s)?, parse(s)?),
    };
    if w == 0 || h == 0 {
        return Err("resolution must be at least 1x1".into());
    }
    Ok((w, h))
}

fn parse_range(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}'")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [b0, b1, p0, p1] if b0 < b1 && p0 < p1 && v.iter().all(|x| x.is_finite()) => Ok([b0, b1, p0, p1]),
        _ => Err("expected B0,B1,P0,P1 with B0 < B1 and P0 < P1".into()),
    }
}

/// Reads a diagram (converted at `dim`) or a points file.
pub fn load_points(path: &Path, dim: usize) -> CliResult<PersistencePointSet<f64>> {
    let text = read_text(path)?;
    let first = text.lines().next().unwrap_or("");
    if first.starts_with(TSV_MAGIC) {
        if dim > 2 {
            return Err(CliError::Usage(format!("--dim must be 0, 1 or 2, got {dim}")));
        }
        let table = DiagramTable::<f64>::parse(&text).map_err(|e| in_file(path, e))?;
        table_to_points(&table, dim).map_err(|e| in_file(path, e))
    } else if first.starts_with("# topoforge-points") {
        PersistencePointSet::from_tsv(&text).map_err(|e| in_file(path, e))
    } else {
        Err(CliError::Io(format!("{}: not a diagram or points file", path.display())))
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn source_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Serialize)]
struct OpConfig<'a, P: Serialize> {
    command: &'static str,
    dim: usize,
    params: &'a P,
}

fn provenance<P: Serialize>(seed: u64, op: &'static str, dim: usize, params: &P) -> Provenance {
    Provenance::new(seed, &OpConfig { command: op, dim, params })
}

pub fn run(args: &PdArgs) -> CliResult<()> {
    match &args.op {
        PdOp::Topk(a) => {
            let mut pts = load_points(&a.src.input, a.src.dim)?;
            if a.exclude_capped {
                pts = pts.without_capped();
            }
            let out = pts.top_k(a.k).map_err(|e| CliError::Usage(e.to_string()))?;
            let prov = provenance(args.seed, "pd topk", a.src.dim, &(a.k, a.exclude_capped));
            let comments = [prov.line(), format!("source={} k={}", source_name(&a.src.input), a.k)];
            emit(&a.src.out, &out.to_tsv(&comments))
        }
        PdOp::Edit(a) => {
            let pts = load_points(&a.src.input, a.src.dim)?;
            let out = pts
                .edit_toward_diagonal(a.index, a.factor)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let prov = provenance(args.seed, "pd edit", a.src.dim, &(a.index, a.factor));
            let comments = [
                prov.line(),
                format!("source={} index={} factor={}", source_name(&a.src.input), a.index, a.factor),
            ];
            emit(&a.src.out, &out.to_tsv(&comments))
        }
        PdOp::Image(a) => run_image(a, args.seed),
        PdOp::Landscape(a) => {
            if a.samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            let pts = load_points(&a.src.input, a.src.dim)?;
            let (lo, hi) = a.t_range.unwrap_or_else(|| {
                let bd = pts.birth_death();
                let lo = bd.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = bd.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
                if lo < hi {
                    (lo, hi)
                } else {
                    (0.0, 1.0)
                }
            });
            let ts = linspace(lo, hi, a.samples);
            let levels = persistence_landscape(&pts, a.levels, &ts).map_err(|e| CliError::Usage(e.to_string()))?;
            let prov = provenance(args.seed, "pd landscape", a.src.dim, &(a.levels, a.samples, a.t_range));
            let comments = [
                prov.line(),
                format!("source={} levels={} t_range={lo},{hi}", source_name(&a.src.input), a.levels),
            ];
            emit(&a.src.out, &landscape_to_tsv(&ts, &levels, &comments))
        }
    }
}

#[derive(Serialize)]
struct ImageSidecar {
    #[serde(flatten)]
    provenance: Provenance,
    source: String,
    dim: usize,
    resolution: (usize, usize),
    sigma: f64,
    weight: WeightArg,
    birth_range: (f64, f64),
    persistence_range: (f64, f64),
    image: String,
    sha256: String,
}

fn run_image(a: &ImageArgs, seed: u64) -> CliResult<()> {
    if !(a.sigma > 0.0 && a.sigma.is_finite()) {
        return Err(CliError::Usage("--sigma must be positive".into()));
    }
    let sets = a
        .inputs
        .iter()
        .map(|p| load_points(p, a.dim))
        .collect::<CliResult<Vec<_>>>()?;
    let range = match a.range {
        Some([b0, b1, p0, p1]) => PiRange { birth: (b0, b1), persistence: (p0, p1) },
        None => PersistenceImageParams::defaults_for(&sets).range,
    };
    let params = PersistenceImageParams {
        resolution: a.res,
        range,
        sigma: a.sigma,
        weight: match a.weight {
            WeightArg::Linear => PiWeight::Linear,
            WeightArg::Constant => PiWeight::Constant,
        },
    };
    let window = [range.birth.0, range.birth.1, range.persistence.0, range.persistence.1];
    let prov = provenance(seed, "pd image", a.dim, &(a.res, a.sigma, a.weight, window));
    for (path, set) in a.inputs.iter().zip(&sets) {
        let img = persistence_image(set, &params).map_err(|e| CliError::Usage(e.to_string()))?;
        let bytes = image_to_raw(&img, &range).to_bytes();
        let name = stem(path);
        let image = format!("{name}.pi.vgrd");
        write_atomic(&a.out.join(&image), &bytes)?;
        let sidecar = ImageSidecar {
            provenance: prov.clone(),
            source: source_name(path),
            dim: set.dim(),
            resolution: a.res,
            sigma: a.sigma,
            weight: a.weight,
            birth_range: range.birth,
            persistence_range: range.persistence,
            image: image.clone(),
            sha256: sha256_hex(&bytes),
        };
        write_json(&a.out.join(format!("{name}.pi.json")), &sidecar)?;
        println!("{}", a.out.join(image).display());
    }
    Ok(())
}
