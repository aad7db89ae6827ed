//! Directory of sweep CSVs plus a JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use noisy_consensus::graphs::Family;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::ReportArgs;
use crate::experiment::{sweep_n, sweep_p, validate_p, validate_random, validate_sigma2, Step, SweepSetup};
use crate::table::{write_csv, Schema};
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

/// File name of a family's N sweep.
pub fn family_file(f: Family) -> String {
    format!("{}.csv", f.name().replace('-', "_"))
}

pub const SWEEP_P_FILE: &str = "sweep_p.csv";

#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub dir: PathBuf,
    pub files: Vec<(String, usize)>,
    pub violations: Vec<String>,
}

pub fn run_report(args: &ReportArgs) -> Result<ReportSummary, CliError> {
    validate_p(args.p)?;
    validate_sigma2(args.step.sigma2)?;
    validate_random(&args.random)?;
    let step = Step::from_args(&args.step, Some(0.8))?;
    if args.n_max < 3 {
        return Err(CliError::validation(format!("--n-max must be at least 3, got {}", args.n_max)));
    }
    for &p in &args.p_grid.0 {
        validate_p(p)?;
    }
    fs::create_dir_all(&args.output).map_err(|e| CliError::io(&args.output, e))?;

    let setup = SweepSetup {
        step,
        sigma2: args.step.sigma2,
        random: args.random.clone(),
        exact_cap: args.exact_cap,
    };
    let sizes: Vec<usize> = (3..=args.n_max).collect();
    let started = Instant::now();
    let mut entries = Vec::new();
    let mut files = Vec::new();
    let mut violations = Vec::new();

    for family in Family::ALL {
        let t = Instant::now();
        let out = sweep_n(&[family], &sizes, args.p, &setup)?;
        let name = family_file(family);
        let entry = write_file(&args.output, &name, Schema::Exact, &out.rows, t)?;
        entries.push(entry);
        files.push((name, out.rows.len()));
        violations.extend(out.violations);
    }
    let t = Instant::now();
    let out = sweep_p(&Family::ALL, args.n_max, &args.p_grid.0, &setup)?;
    entries.push(write_file(&args.output, SWEEP_P_FILE, Schema::Exact, &out.rows, t)?);
    files.push((SWEEP_P_FILE.to_owned(), out.rows.len()));
    violations.extend(out.violations);

    let (step_name, step_value) = match step {
        Step::Eps(e) => ("eps", e),
        Step::K(k) => ("k", k),
    };
    let mut manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": {
            "n_max": args.n_max,
            "p": args.p,
            "p_grid": args.p_grid.0,
            "sigma2": args.step.sigma2,
            "p_er": args.random.p_er,
            "seed": args.random.seed,
            "realizations": args.random.realizations,
            "exact_cap": args.exact_cap,
        },
        "replay": replay_command(args, step),
        "files": entries,
        "bound_chain_violations": violations,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    manifest["parameters"][step_name] = json!(step_value);
    let path = args.output.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(ReportSummary {
        dir: args.output.clone(),
        files,
        violations,
    })
}

fn write_file(dir: &Path, name: &str, schema: Schema, rows: &[crate::table::Row], started: Instant) -> Result<Value, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, schema, rows).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, &buf).map_err(|e| CliError::io(&path, e))?;
    let digest = Sha256::digest(&buf);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(json!({
        "name": name,
        "rows": rows.len(),
        "sha256": hex,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    }))
}

fn replay_command(args: &ReportArgs, step: Step) -> String {
    let g = &args.p_grid.0;
    let grid = match g.len() {
        0 => String::new(),
        1 => format!("{0}:{0}:1", g[0]),
        _ => format!("{}:{}:{}", g[0], g[g.len() - 1], ((g[1] - g[0]) * 1e12).round() / 1e12),
    };
    let step = match step {
        Step::Eps(e) => format!("--eps {e}"),
        Step::K(k) => format!("--k {k}"),
    };
    format!(
        "noisy-consensus report --output {} --n-max {} --p {} --p-grid {grid} {step} --sigma2 {} --p-er {} --seed {} --realizations {} --exact-cap {}",
        args.output.display(),
        args.n_max,
        args.p,
        args.step.sigma2,
        args.random.p_er,
        args.random.seed,
        args.random.realizations,
        args.exact_cap,
    )
}
