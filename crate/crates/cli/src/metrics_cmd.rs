//! `metrics`: set-level comparisons between generated and reference shapes.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ndarray::Array2;
use serde::Serialize;

use topoforge::metrics::{coverage, fid_multiview, one_nna, FeatureStats, PointSet, SetRole, ShapeDistance, ShapeSet};
use topoforge::vgrd::RawGrid;

use crate::common::{has_extension, in_file, list_dir, read_bytes, read_text, write_json, CliError, CliResult, Provenance};

pub const POINT_EXTENSIONS: [&str; 4] = ["xyz", "pts", "txt", "csv"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Metric {
    #[value(name = "chamfer")]
    #[serde(rename = "chamfer")]
    Chamfer,
    #[value(name = "emd")]
    #[serde(rename = "emd")]
    Emd,
    #[value(name = "1-nna")]
    #[serde(rename = "1-nna")]
    OneNna,
    #[value(name = "coverage")]
    #[serde(rename = "coverage")]
    Coverage,
    #[value(name = "fid")]
    #[serde(rename = "fid")]
    Fid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NnaDistance {
    Chamfer,
    Emd,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Directory of generated shapes (point files, or `.vgrd` feature matrices for fid).
    #[arg(long)]
    pub generated: PathBuf,
    /// Directory of reference shapes.
    #[arg(long)]
    pub reference: PathBuf,
    /// Metric to report; repeatable.
    #[arg(long = "metric", value_enum, required = true)]
    pub metrics: Vec<Metric>,
    /// Chamfer on unsquared nearest-neighbour distances.
    #[arg(long)]
    pub cd_root: bool,
    /// Shape distance for 1-NNA and coverage.
    #[arg(long, value_enum, default_value_t = NnaDistance::Chamfer)]
    pub nna_dist: NnaDistance,
    /// Number of view pairs for fid; defaults to the number of feature files.
    #[arg(long)]
    pub views: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricsConfig<'a> {
    command: &'static str,
    metrics: &'a [Metric],
    cd_root: bool,
    nna_dist: NnaDistance,
    views: Option<usize>,
}

#[derive(Serialize)]
struct Entry {
    metric: Metric,
    value: f64,
    parameters: serde_json::Value,
}

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    provenance: Provenance,
    generated_files: usize,
    reference_files: usize,
    results: Vec<Entry>,
}

fn is_point_file(p: &Path) -> bool {
    POINT_EXTENSIONS.iter().any(|e| has_extension(p, e))
}

fn load_shapes(dir: &Path, role: SetRole) -> CliResult<ShapeSet<f64>> {
    let files = list_dir(dir, is_point_file)?;
    if files.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no point files (.{})",
            dir.display(),
            POINT_EXTENSIONS.join(", .")
        )));
    }
    let shapes = files
        .iter()
        .map(|f| PointSet::from_text(&read_text(f)?).map_err(|e| in_file(f, e)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ShapeSet::new(role, shapes)?)
}

fn load_matrix(path: &Path) -> CliResult<Array2<f64>> {
    let raw = RawGrid::from_bytes(&read_bytes(path)?).map_err(|e| in_file(path, e))?;
    let [cols, rows, depth] = raw.dims;
    if depth != 1 {
        return Err(CliError::Io(format!("{}: feature matrix must have nz = 1", path.display())));
    }
    Array2::from_shape_vec((rows as usize, cols as usize), raw.values.iter().map(|&v| v as f64).collect())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_views(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let files = list_dir(dir, |p| has_extension(p, "vgrd"))?;
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .vgrd feature matrices", dir.display())));
    }
    Ok(files)
}

fn paired_mean(g: &ShapeSet<f64>, r: &ShapeSet<f64>, dist: ShapeDistance) -> CliResult<f64> {
    if g.len() != r.len() {
        return Err(CliError::Usage(format!(
            "pairwise {} needs equal set sizes, found {} and {}",
            dist.name(),
            g.len(),
            r.len()
        )));
    }
    let mut total = 0.0;
    for (a, b) in g.shapes().iter().zip(r.shapes()) {
        total += dist.eval(a, b).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(total / g.len() as f64)
}

pub fn run(args: &MetricsArgs) -> CliResult<()> {
    let needs_points = args.metrics.iter().any(|m| *m != Metric::Fid);
    let sets = if needs_points {
        Some((
            load_shapes(&args.generated, SetRole::Generated)?,
            load_shapes(&args.reference, SetRole::Reference)?,
        ))
    } else {
        None
    };
    let chamfer_kind = if args.cd_root { ShapeDistance::ChamferRoot } else { ShapeDistance::Chamfer };
    let nna_kind = match args.nna_dist {
        NnaDistance::Chamfer => chamfer_kind,
        NnaDistance::Emd => ShapeDistance::Emd,
    };
    let usage = |e: topoforge::Error| CliError::Usage(e.to_string());
    let mut results = Vec::new();
    let mut counts = (0, 0);
    if let Some((g, r)) = &sets {
        counts = (g.len(), r.len());
    }
    for &metric in &args.metrics {
        let (value, parameters) = match (metric, &sets) {
            (Metric::Chamfer, Some((g, r))) => (
                paired_mean(g, r, chamfer_kind)?,
                serde_json::json!({ "distance": chamfer_kind.name(), "pairing": "sorted file names" }),
            ),
            (Metric::Emd, Some((g, r))) => (
                paired_mean(g, r, ShapeDistance::Emd)?,
                serde_json::json!({ "pairing": "sorted file names" }),
            ),
            (Metric::OneNna, Some((g, r))) => (
                one_nna(g, r, nna_kind).map_err(usage)?,
                serde_json::json!({ "distance": nna_kind.name() }),
            ),
            (Metric::Coverage, Some((g, r))) => (
                coverage(g, r, nna_kind).map_err(usage)?,
                serde_json::json!({ "distance": nna_kind.name() }),
            ),
            (Metric::Fid, _) => {
                let gf = load_views(&args.generated)?;
                let rf = load_views(&args.reference)?;
                if gf.len() != rf.len() {
                    return Err(CliError::Usage(format!(
                        "fid needs one feature matrix per view in each directory, found {} and {}",
                        gf.len(),
                        rf.len()
                    )));
                }
                let views = args.views.unwrap_or(gf.len());
                let mut pairs = Vec::with_capacity(gf.len());
                for (v, (a, b)) in gf.iter().zip(&rf).enumerate() {
                    let sa = FeatureStats::from_features(&load_matrix(a)?, Some(v)).map_err(|e| in_file(a, e))?;
                    let sb = FeatureStats::from_features(&load_matrix(b)?, Some(v)).map_err(|e| in_file(b, e))?;
                    pairs.push((sa, sb));
                }
                counts = (gf.len(), rf.len());
                (fid_multiview(&pairs, views).map_err(usage)?, serde_json::json!({ "views": views }))
            }
            _ => unreachable!("point sets are loaded for every non-fid metric"),
        };
        results.push(Entry { metric, value, parameters });
    }
    let config = MetricsConfig {
        command: "metrics",
        metrics: &args.metrics,
        cd_root: args.cd_root,
        nna_dist: args.nna_dist,
        views: args.views,
    };
    let report = Report {
        provenance: Provenance::new(args.seed, &config),
        generated_files: counts.0,
        reference_files: counts.1,
        results,
    };
    match &args.out {
        Some(p) => write_json(p, &report),
        None => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
    }
}
