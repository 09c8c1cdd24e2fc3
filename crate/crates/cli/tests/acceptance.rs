//! Acceptance criteria 1-10, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines reach the terminal; exits nonzero if any criterion fails.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn tf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoforge")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Result<String, String> {
    let out = tf(args);
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Largest-persistence dim-1 pair of a diagram file.
fn dominant_loop(tsv: &str) -> Option<(f64, f64)> {
    tsv.lines()
        .filter(|l| l.starts_with("1\t"))
        .filter_map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            Some((f[1].parse().ok()?, f[2].parse().ok()?))
        })
        .max_by(|a: &(f64, f64), b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
}

fn betti_ground_truth(work: &Path) -> Outcome {
    let expected = [
        ("ball", "1 0 0"),
        ("shell", "1 0 1"),
        ("torus", "1 1 0"),
        ("double-torus", "1 2 0"),
        ("two-balls", "2 0 0"),
        ("holed-box", "1 1 0"),
    ];
    let dir = work.join("presets");
    let start = Instant::now();
    ok(&["gen", "--preset", "all", "--res", "64", "--out", s(&dir)])?;
    let printed = ok(&["analyze", s(&dir), "--betti", "0"])?;
    let secs = start.elapsed().as_secs_f64();
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut bad = Vec::new();
    for (name, want) in expected {
        let got = printed
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{name}\t")))
            .unwrap_or("missing");
        let recorded = manifest["volumes"]
            .as_array()
            .and_then(|v| v.iter().find(|e| e["name"] == name))
            .map(|e| e["betti"].to_string())
            .unwrap_or_default();
        if got != want || recorded != format!("[{}]", want.replace(' ', ",")) {
            bad.push(format!("{name}: got {got}, manifest {recorded}, want {want}"));
        }
    }
    check(
        bad.is_empty() && secs < 60.0,
        if bad.is_empty() {
            format!("6 presets at 64^3 match ground truth in {secs:.1} s (limit 60 s)")
        } else {
            bad.join("; ")
        },
    )
}

fn torus_convergence(work: &Path) -> Outcome {
    let mut errs = Vec::new();
    for res in [32usize, 64] {
        let dir = work.join(format!("torus{res}"));
        ok(&["gen", "--preset", "torus", "--res", &res.to_string(), "--out", s(&dir)])?;
        ok(&["analyze", s(&dir.join("torus.vgrd"))])?;
        let tsv = std::fs::read_to_string(dir.join("torus.pd.tsv")).map_err(|e| e.to_string())?;
        let (b, d) = dominant_loop(&tsv).ok_or("no dim-1 pair")?;
        errs.push((res, b, d, (b + 0.1).abs(), (d - 0.15).abs()));
    }
    let (_, b64, d64, eb64, ed64) = errs[1];
    let (eb32, ed32) = (errs[0].3, errs[0].4);
    let h = 1.0 / 63.0;
    let (rb, rd) = (eb64 / eb32, ed64 / ed32);
    // halving within +-30%
    let halves = |r: f64| (0.35..=0.65).contains(&r);
    check(
        eb64 <= 2.0 * h && ed64 <= 2.0 * h && halves(rb) && halves(rd),
        format!(
            "64^3 pair ({b64:.4}, {d64:.4}), errors {:.2}h/{:.2}h (limit 2h); 32->64 error ratios birth {rb:.3} death {rd:.3} (want 0.5 +- 30%)",
            eb64 / h,
            ed64 / h
        ),
    )
}

fn suite<'a>(report: &'a Value, name: &str) -> Option<&'a Value> {
    report["suites"].as_array()?.iter().find(|s| s["name"] == name)
}

fn check_of<'a>(report: &'a Value, suite_name: &str, check_name: &str) -> Option<&'a Value> {
    suite(report, suite_name)?["checks"].as_array()?.iter().find(|c| c["name"] == check_name)
}

/// Requires the named checks to have passed with at least the given case counts.
fn from_report(report: &Value, suite_name: &str, wanted: &[(&str, u64)]) -> Outcome {
    let mut details = Vec::new();
    let mut good = true;
    for &(name, min_cases) in wanted {
        match check_of(report, suite_name, name) {
            Some(c) => {
                let cases = c["cases"].as_u64().unwrap_or(0);
                let passed = c["passed"] == true && cases >= min_cases;
                good &= passed;
                details.push(format!("{name} [{cases} cases]: {}", c["detail"].as_str().unwrap_or("")));
            }
            None => {
                good = false;
                details.push(format!("{name}: missing"));
            }
        }
    }
    check(good, details.join("; "))
}

fn performance(work: &Path) -> Outcome {
    let dir = work.join("big");
    ok(&["gen", "--preset", "torus", "--res", "128", "--out", s(&dir)])?;
    let start = Instant::now();
    let printed = ok(&["analyze", s(&dir.join("torus.vgrd")), "--betti", "0"])?;
    let secs = start.elapsed().as_secs_f64();
    // peak resident set of the largest child so far, in KiB on Linux
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let rc = unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) };
    let peak_gb = if rc == 0 { usage.ru_maxrss as f64 / (1024.0 * 1024.0) } else { f64::NAN };
    check(
        secs < 120.0 && peak_gb < 8.0 && printed.trim() == "1 1 0",
        format!("128^3 torus persistence in {secs:.1} s (limit 120 s), peak RSS {peak_gb:.2} GB (limit 8 GB), betti {}", printed.trim()),
    )
}

fn reproducibility(work: &Path, first_report: &Path) -> Outcome {
    let second = work.join("verify2.json");
    ok(&["verify", "--report", s(&second)])?;
    let same_verify = std::fs::read(first_report).ok() == std::fs::read(&second).ok();
    let mut differing = Vec::new();
    let mut files = 0;
    for run in ["gen-a", "gen-b"] {
        let dir = work.join(run);
        ok(&["gen", "--preset", "all", "--res", "32", "--out", s(&dir)])?;
        ok(&["gen", "--preset", "random-csg", "--count", "10", "--seed", "7", "--res", "32", "--out", s(&dir.join("csg"))])?;
    }
    for sub in ["", "csg"] {
        let a = work.join("gen-a").join(sub);
        let b = work.join("gen-b").join(sub);
        for entry in std::fs::read_dir(&a).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                continue;
            }
            files += 1;
            let name = path.file_name().expect("file name");
            if std::fs::read(&path).ok() != std::fs::read(b.join(name)).ok() {
                differing.push(name.to_string_lossy().into_owned());
            }
        }
    }
    check(
        same_verify && differing.is_empty() && files > 0,
        format!(
            "verify reports identical: {same_verify}; {files} gen outputs compared, {} differ{}",
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(": {}", differing.join(", ")) }
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let work = tmp.path();
    let report_path = work.join("verify.json");

    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "Betti ground truth", betti_ground_truth(work)));
    results.push((2, "torus diagram and convergence", torus_convergence(work)));

    let verify = tf(&["verify", "--report", s(&report_path)]);
    let report: Value = std::fs::read_to_string(&report_path)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(Value::Null);
    if report.is_null() {
        eprintln!("verify produced no report: {}", String::from_utf8_lossy(&verify.stderr));
    }
    results.push((3, "oracle equivalence", from_report(&report, "oracle", &[("fast-equals-naive", 100)])));
    results.push((4, "Euler-Poincare identity", from_report(&report, "euler", &[("euler-poincare", 200)])));
    results.push((
        5,
        "stability",
        from_report(&report, "stability", &[("bottleneck-eps-0.005", 60), ("bottleneck-eps-0.01", 60)]),
    ));
    results.push((6, "performance envelope", performance(work)));
    results.push((
        7,
        "kernel verification",
        from_report(
            &report,
            "kernels",
            &[
                ("kl-value", 1),
                ("kl-gradient", 100),
                ("bce-gradient", 100),
                ("edm-oracle-denoiser", 50),
                ("attention-row-sums", 20),
                ("topo-permutation-invariance", 20),
            ],
        ),
    ));
    results.push((8, "sampler moments", from_report(&report, "sampler", &[("gaussian-moments", 1)])));
    results.push((
        9,
        "metrics",
        from_report(
            &report,
            "metrics",
            &[
                ("nna-same-distribution", 1),
                ("nna-far-clusters", 1),
                ("fid-mean-shift", 20),
                ("emd-exact", 50),
                ("chamfer-exact", 50),
            ],
        ),
    ));
    results.push((10, "reproducibility", reproducibility(work, &report_path)));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("criterion {n:>2} PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
