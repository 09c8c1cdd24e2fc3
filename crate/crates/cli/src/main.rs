//! `topoforge`: volume synthesis, persistence analysis, diagram tools, metrics and
//! verification suites.

mod analyze;
mod common;
mod gen;
mod metrics_cmd;
mod pd_cmd;
mod presets;
mod suites;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "topoforge", version, about = "Topological analysis of implicit 3D shapes")]
struct Cli {
    /// Worker threads; work is split across volumes (or suites), never within one.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rasterize presets or scene files into volume files.
    Gen(gen::GenArgs),
    /// Compute persistence diagrams of volume files.
    Analyze(analyze::AnalyzeArgs),
    /// Truncate, edit or vectorize diagrams.
    Pd(pd_cmd::PdArgs),
    /// Compare generated and reference shape sets.
    Metrics(metrics_cmd::MetricsArgs),
    /// Check the latent-stack kernels and the sampler.
    VerifyKernels(verify::VerifyKernelsArgs),
    /// Run the invariant suites.
    Verify(verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Gen(a) => gen::run(a, cli.threads),
        Command::Analyze(a) => analyze::run(a, cli.threads),
        Command::Pd(a) => pd_cmd::run(a),
        Command::Metrics(a) => metrics_cmd::run(a),
        Command::VerifyKernels(a) => verify::run_kernels(a),
        Command::Verify(a) => verify::run_verify(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
