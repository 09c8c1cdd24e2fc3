//! `analyze`: persistence diagrams of volume files.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use topoforge::cubical::{build_filtration, compute_persistence, DiagramTable};
use topoforge::field::VolumeGrid;
use topoforge::pd::diagram_svg;

use crate::common::{has_extension, in_file, list_dir, read_bytes, run_pool, stem, write_atomic, CliError, CliResult, Provenance};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Volume files or directories of `.vgrd` files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output directory; defaults to each input's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a birth/death scatter plot per volume.
    #[arg(long)]
    pub svg: bool,
    /// Print Betti numbers at this threshold.
    #[arg(long, value_name = "T", allow_hyphen_values = true)]
    pub betti: Option<f64>,
    /// Keep pairs with birth = death.
    #[arg(long)]
    pub keep_zero: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct AnalyzeConfig {
    command: &'static str,
    keep_zero: bool,
}

pub fn expand_inputs(inputs: &[PathBuf], ext: &str) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let found = list_dir(p, |f| has_extension(f, ext))?;
            if found.is_empty() {
                return Err(CliError::Usage(format!("{}: no .{ext} files", p.display())));
            }
            out.extend(found);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(CliError::Io(format!("{}: no such file or directory", p.display())));
        }
    }
    Ok(out)
}

fn analyze_one(path: &Path, args: &AnalyzeArgs, prov: &Provenance) -> CliResult<Option<[usize; 3]>> {
    let grid = VolumeGrid::<f32>::from_bytes(&read_bytes(path)?).map_err(|e| in_file(path, e))?;
    let cx = build_filtration(grid).map_err(|e| in_file(path, e))?;
    let mut pds = compute_persistence(&cx);
    drop(cx);
    let betti = args.betti.map(|t| pds.betti_at(t as f32));
    if !args.keep_zero {
        pds = pds.without_zero_persistence();
    }
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let name = stem(path);
    let source = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let comments = [prov.line(), format!("source={source}")];
    write_atomic(&dir.join(format!("{name}.pd.tsv")), pds.to_tsv(&comments).as_bytes())?;
    if args.svg {
        let svg = diagram_svg(&DiagramTable::from_diagrams(&pds), &[0, 1, 2]);
        let text = format!("<!-- {} {} -->\n{svg}", comments[0], comments[1]);
        write_atomic(&dir.join(format!("{name}.pd.svg")), text.as_bytes())?;
    }
    Ok(betti)
}

pub fn run(args: &AnalyzeArgs, threads: usize) -> CliResult<()> {
    let files = expand_inputs(&args.inputs, "vgrd")?;
    if let Some(t) = args.betti {
        if !t.is_finite() {
            return Err(CliError::Usage("--betti needs a finite threshold".into()));
        }
    }
    let prov = Provenance::new(
        args.seed,
        &AnalyzeConfig {
            command: "analyze",
            keep_zero: args.keep_zero,
        },
    );
    let results = run_pool(&files, threads, |f| analyze_one(f, args, &prov));
    let many = files.len() > 1;
    for (path, r) in files.iter().zip(results) {
        if let Some([b0, b1, b2]) = r? {
            if many {
                println!("{}\t{b0} {b1} {b2}", stem(path));
            } else {
                println!("{b0} {b1} {b2}");
            }
        }
    }
    Ok(())
}
