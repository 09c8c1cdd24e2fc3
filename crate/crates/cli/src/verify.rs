//! `verify` and `verify-kernels`: invariant suites with a pass/fail table and a JSON report.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use topoforge::cubical::Fault;
use topoforge::latentnet::{AttentionParams, LatentConfig};

use crate::common::{write_atomic, write_json, CliError, CliResult, Provenance};
use crate::suites::{
    betti_suite, euler_suite, kernel_checks, metrics_suite, oracle_suite, sampler_checks, stability_suite, SuiteReport,
    SUITE_NAMES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultArg {
    /// Drop the pairs recorded by the clearing step of the reduction.
    DropClearedPairs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only this suite; repeatable.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITE_NAMES))]
    pub only: Vec<String>,
    /// Deliberately break the reduction to check that the oracle suite notices.
    #[arg(long, value_enum)]
    pub inject_fault: Option<FaultArg>,
    /// Grid resolution of the preset Betti suite.
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyKernelsArgs {
    /// Parameter manifest to check; seeded parameters when absent.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Save the parameters used as `params.manifest` and `params.bin` in this directory.
    #[arg(long)]
    pub save_params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Serialize)]
struct VerifyConfig<'a> {
    command: &'static str,
    suites: &'a [String],
    fault: Option<FaultArg>,
    res: usize,
    params: Option<String>,
}

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    provenance: Provenance,
    fault: Option<FaultArg>,
    passed: bool,
    suites: Vec<SuiteReport>,
}

fn print_table(report: &Report) {
    for suite in &report.suites {
        for c in &suite.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            println!("{:<10} {:<30} {:>6}  {status}  {}", suite.name, c.name, c.cases, c.detail);
        }
    }
    let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} suites passed", report.suites.len());
    } else {
        println!("FAILED suites: {}", failed.join(", "));
    }
}

fn finish(report: Report, out: &Option<PathBuf>, json: bool) -> CliResult<()> {
    if let Some(p) = out {
        write_json(p, &report)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_table(&report);
    }
    if report.passed {
        return Ok(());
    }
    for s in report.suites.iter().filter(|s| !s.passed) {
        for c in s.checks.iter().filter(|c| !c.passed) {
            for f in &c.failures {
                eprintln!("replay {}/{}: {}", s.name, c.name, f);
            }
        }
    }
    let n = report.suites.iter().filter(|s| !s.passed).count();
    Err(CliError::Verify(format!("{n} suite(s) failed")))
}

pub fn run_verify(args: &VerifyArgs, threads: usize) -> CliResult<()> {
    if args.res < 8 {
        return Err(CliError::Usage("--res must be at least 8".into()));
    }
    let selected: Vec<String> = if args.only.is_empty() {
        SUITE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        SUITE_NAMES.iter().filter(|s| args.only.iter().any(|o| o == *s)).map(|s| s.to_string()).collect()
    };
    let fault = args.inject_fault.map(|f| match f {
        FaultArg::DropClearedPairs => Fault::DropClearedPairs,
    });
    let seed = args.seed;
    let suites = crate::common::run_pool(&selected, threads, |name| match name.as_str() {
        "oracle" => oracle_suite(seed, fault),
        "euler" => euler_suite(seed),
        "stability" => stability_suite(seed),
        "betti" => betti_suite(args.res),
        "kernels" => {
            let params = AttentionParams::<f64>::seeded(LatentConfig::default(), seed).expect("default config");
            SuiteReport::new("kernels", kernel_checks(&params, seed))
        }
        "sampler" => SuiteReport::new("sampler", sampler_checks(seed)),
        "metrics" => metrics_suite(seed),
        other => unreachable!("clap restricts suite names, got {other}"),
    });
    let config = VerifyConfig {
        command: "verify",
        suites: &selected,
        fault: args.inject_fault,
        res: args.res,
        params: None,
    };
    let report = Report {
        provenance: Provenance::new(seed, &config),
        fault: args.inject_fault,
        passed: suites.iter().all(|s| s.passed),
        suites,
    };
    finish(report, &args.report, args.json)
}

pub fn run_kernels(args: &VerifyKernelsArgs) -> CliResult<()> {
    let (params, source) = match &args.params {
        Some(p) => (AttentionParams::<f64>::read_manifest(p).map_err(|e| crate::common::in_file(p, e))?, Some(p)),
        None => (
            AttentionParams::<f64>::seeded(LatentConfig::default(), args.seed).map_err(CliError::from)?,
            None,
        ),
    };
    if let Some(dir) = &args.save_params {
        let (manifest, blob) = params.to_files("params.bin")?;
        write_atomic(&dir.join("params.bin"), &blob)?;
        write_atomic(&dir.join("params.manifest"), manifest.as_bytes())?;
    }
    let params_hash = source.map(|_| {
        let (manifest, blob) = params.to_files("params.bin").expect("loaded params are f32");
        crate::common::sha256_hex(&[manifest.as_bytes(), &blob].concat())
    });
    let suites = vec![
        SuiteReport::new("kernels", kernel_checks(&params, args.seed)),
        SuiteReport::new("sampler", sampler_checks(args.seed)),
    ];
    let names = ["kernels".to_string(), "sampler".to_string()];
    let config = VerifyConfig {
        command: "verify-kernels",
        suites: &names,
        fault: None,
        res: 0,
        params: params_hash,
    };
    let report = Report {
        provenance: Provenance::new(args.seed, &config),
        fault: None,
        passed: suites.iter().all(|s| s.passed),
        suites,
    };
    finish(report, &args.report, args.json)
}
