//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines always show up in `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use noisy_consensus::exec::Exec;
use noisy_consensus::graphs::{laplacian_spectrum, make_complete, make_grid, make_path, make_star, UndirectedGraph};
use noisy_consensus::noise_index::{exact_noise_index, family_bounds, noise_report, ridl_bounds, NoiseReport, ReportOptions};
use noisy_consensus::ridl::{ExpectedOperators, KForm, KOptions, RidlConfig};
use noisy_consensus::simulator::{default_horizon, estimate_noise_index, NoiseDist, SimConfig, SimEstimate};
use noisy_consensus::tol::SANDWICH_SLACK;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const PS: [f64; 3] = [0.3, 0.5, 0.9];
const KS: [f64; 2] = [0.4, 0.8];

fn small_sweep() -> Vec<(String, UndirectedGraph)> {
    let mut out = Vec::new();
    for n in 3..=10 {
        out.push((format!("S{n}"), make_star(n).unwrap()));
    }
    for n in 2..=10 {
        out.push((format!("P{n}"), make_path(n).unwrap()));
        out.push((format!("K{n}"), make_complete(n).unwrap()));
    }
    for dims in [[2, 2], [2, 3], [2, 4], [3, 3], [2, 5]] {
        out.push((format!("G{}x{}", dims[0], dims[1]), make_grid(&dims).unwrap()));
    }
    out
}

fn report(g: &UndirectedGraph, cfg: &RidlConfig) -> NoiseReport {
    noise_report(g, cfg, &ReportOptions::default()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, g) in small_sweep() {
        for p in PS {
            for k in KS {
                let cfg = RidlConfig::from_k(&g, p, k, 1.0).unwrap();
                let moments = ExpectedOperators::from_moments(&g, &cfg, &KOptions::default()).unwrap();
                let enumerated = ExpectedOperators::from_enumeration(&g, &cfg, KForm::OmegaFirst, Exec::default()).unwrap();
                let a = exact_noise_index(&moments, 1.0).unwrap();
                let b = exact_noise_index(&enumerated, 1.0).unwrap();
                let rel = (a - b).abs() / b.abs();
                worst = worst.max(rel);
                count += 1;
                ensure(rel <= 1e-10, || format!("{name} p={p} k={k}: moments {a} vs enumeration {b} (rel {rel:e})"))?;
            }
        }
    }
    Ok(format!("{count} configurations, worst relative gap {worst:.2e}"))
}

fn sandwich() -> Outcome {
    let mut count = 0;
    let mut tightest = f64::INFINITY;
    for (name, g) in small_sweep() {
        for p in PS {
            for k in KS {
                let cfg = RidlConfig::from_k(&g, p, k, 1.0).unwrap();
                let r = report(&g, &cfg);
                r.check_chain(SANDWICH_SLACK).map_err(|e| format!("{name} p={p} k={k}: {e}"))?;
                let j = r.j_exact.unwrap();
                tightest = tightest.min((j - r.j_lb).min(r.j_ub - j));
                count += 1;
            }
        }
    }
    Ok(format!("{count} configurations, smallest margin {tightest:.2e}"))
}

fn reference_value() -> Outcome {
    let g = make_complete(2).unwrap();
    let cfg = RidlConfig::new(0.5, 0.4, 1.0).unwrap();
    let r = report(&g, &cfg);
    let j = r.j_exact.unwrap();
    for (label, got, want) in [("j_exact", j, 25.0 / 12.0), ("j_lb", r.j_lb, 25.0 / 18.0), ("j_ub", r.j_ub, 25.0 / 12.0)] {
        ensure((got - want).abs() <= 1e-12, || format!("{label} = {got}, want {want}"))?;
    }
    Ok(format!("j_exact={j:.12} j_lb={:.12} j_ub={:.12}", r.j_lb, r.j_ub))
}

fn deterministic_collapse() -> Outcome {
    let mut parts = Vec::new();
    for (name, g) in [("P10", make_path(10).unwrap()), ("S10", make_star(10).unwrap())] {
        let cfg = RidlConfig::from_k(&g, 1.0, 0.8, 1.0).unwrap();
        let r = report(&g, &cfg);
        let gap = (r.j_ub - r.j_lb).abs();
        let exact_gap = (r.j_exact.unwrap() - r.j_lb).abs();
        ensure(gap <= 1e-10, || format!("{name}: |j_ub - j_lb| = {gap:e}"))?;
        ensure(exact_gap <= 1e-9, || format!("{name}: |j_exact - j_lb| = {exact_gap:e}"))?;
        parts.push(format!("{name} |ub-lb|={gap:.1e} |exact-lb|={exact_gap:.1e}"));
    }
    Ok(parts.join(", "))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let k2 = make_complete(2).unwrap();
    let k2_cfg = RidlConfig::new(0.5, 0.4, 1.0).unwrap();
    let cases = [
        ("K2", k2, k2_cfg, Some(200)),
        ("P6", make_path(6).unwrap(), RidlConfig::from_k(&make_path(6).unwrap(), 0.9, 0.8, 1.0).unwrap(), None),
        ("S6", make_star(6).unwrap(), RidlConfig::from_k(&make_star(6).unwrap(), 0.9, 0.8, 1.0).unwrap(), None),
    ];
    for (i, (name, g, cfg, horizon)) in cases.into_iter().enumerate() {
        let exact = report(&g, &cfg).j_exact.unwrap();
        let t = horizon.unwrap_or_else(|| default_horizon(&g, &cfg).unwrap());
        let est = estimate_noise_index(&g, &cfg, &SimConfig::new(t, 20_000, 2024 + i as u64)).unwrap();
        let z = (est.j_hat - exact) / est.std_error;
        ensure(z.abs() <= 3.0, || format!("{name}: j_hat {} vs exact {exact}, {z:.2} SE", est.j_hat))?;
        parts.push(format!("{name} {:.4}±{:.4} vs {exact:.4} ({z:+.2} SE)", est.j_hat, est.std_error));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{} in {secs:.1} s", parts.join(", ")))
}

fn star_asymptotics() -> Outcome {
    let g = make_star(100).unwrap();
    let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
    let r = report(&g, &cfg);
    let slope = 1.0 / (2.0 * 0.8 * 0.81);
    let lb = r.j_lb / 100.0;
    let ub = r.j_ub / 100.0;
    let (dl, du) = ((lb - slope).abs() / slope, (ub - slope).abs() / slope);
    ensure(dl <= 0.10, || format!("j_lb/N = {lb} is {:.1}% from {slope}", 100.0 * dl))?;
    ensure(du <= 0.15, || format!("j_ub/N = {ub} is {:.1}% from {slope}", 100.0 * du))?;
    Ok(format!("slope {slope:.4}: j_lb/N={lb:.4} ({:.1}%), j_ub/N={ub:.4} ({:.1}%)", 100.0 * dl, 100.0 * du))
}

fn complete_limits() -> Outcome {
    let (p, k) = (0.9, 0.8);
    let g = make_complete(100).unwrap();
    let cfg = RidlConfig::from_k(&g, p, k, 1.0).unwrap();
    let r = noise_report(&g, &cfg, &ReportOptions { exact_cap: 0, ..Default::default() }).unwrap();
    let lim_lb = 1.0 / (p * p * k * (2.0 - p * p * k));
    let lim_ub = 1.0 / (p * p * k * (2.0 - p * k));
    let (dl, du) = ((r.j_lb - lim_lb).abs() / lim_lb, (r.j_ub - lim_ub).abs() / lim_ub);
    ensure(dl <= 0.02, || format!("j_lb = {} vs {lim_lb} ({:.2}%)", r.j_lb, 100.0 * dl))?;
    ensure(du <= 0.02, || format!("j_ub = {} vs {lim_ub} ({:.2}%)", r.j_ub, 100.0 * du))?;
    let mut worst_ratio: f64 = 0.0;
    let mut max_rel_ub: f64 = 0.0;
    for n in 3..=30 {
        let g = make_complete(n).unwrap();
        let cfg = RidlConfig::from_k(&g, p, k, 1.0).unwrap();
        let (rel_lb, rel_ub) = report(&g, &cfg).relative_errors().unwrap();
        ensure(rel_ub.abs() * 5.0 <= rel_lb, || format!("K{n}: rel_ub {rel_ub:e} vs rel_lb {rel_lb:e}"))?;
        worst_ratio = worst_ratio.max(rel_ub.abs() / rel_lb);
        max_rel_ub = max_rel_ub.max(rel_ub.abs());
    }
    Ok(format!(
        "j_lb={:.4} ({:.2}% from {lim_lb:.4}), j_ub={:.4} ({:.2}% from {lim_ub:.4}); K3..K30 max |rel_ub|={max_rel_ub:.1e}, max |rel_ub|/rel_lb={worst_ratio:.1e}",
        r.j_lb,
        100.0 * dl,
        r.j_ub,
        100.0 * du
    ))
}

fn path_growth() -> Outcome {
    let mut exact = std::collections::BTreeMap::new();
    for n in [5, 10, 15, 20, 25, 30, 35, 40] {
        let g = make_path(n).unwrap();
        let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
        let r = report(&g, &cfg);
        let j = r.j_exact.unwrap();
        ensure(r.j_res_lb - SANDWICH_SLACK <= j && j <= r.j_res_ub + SANDWICH_SLACK, || {
            format!("P{n}: {j} outside [{}, {}]", r.j_res_lb, r.j_res_ub)
        })?;
        exact.insert(n, j);
    }
    let ratio = exact[&40] / exact[&20];
    ensure((1.7..=2.3).contains(&ratio), || format!("J(P40)/J(P20) = {ratio}"))?;
    Ok(format!("J(P40)/J(P20) = {ratio:.4}; resistance sandwich holds at N=5..40 step 5"))
}

fn closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=100 {
        let cases = [
            ("star", make_star(n).unwrap(), family_bounds::star as fn(usize, &RidlConfig) -> _),
            ("path", make_path(n).unwrap(), family_bounds::path),
            ("complete", make_complete(n).unwrap(), family_bounds::complete),
        ];
        for (name, g, closed) in cases {
            let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
            let spectral = ridl_bounds(&laplacian_spectrum(&g).unwrap(), &cfg).unwrap();
            let formula = closed(n, &cfg);
            for (a, b) in [(spectral.lower, formula.lower), (spectral.upper, formula.upper)] {
                let rel = (a - b).abs() / b.abs().max(1.0);
                worst = worst.max(rel);
                ensure(rel <= 1e-10, || format!("{name} N={n}: spectral {a} vs closed form {b}"))?;
            }
        }
    }
    Ok(format!("star/path/complete N=3..100, worst gap {worst:.1e}"))
}

fn distribution_invariance() -> Outcome {
    let g = make_path(6).unwrap();
    let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
    let t = default_horizon(&g, &cfg).unwrap();
    let run = |noise, seed| -> SimEstimate {
        let mut sim = SimConfig::new(t, 20_000, seed);
        sim.noise = noise;
        estimate_noise_index(&g, &cfg, &sim).unwrap()
    };
    let ests = [
        ("gaussian", run(NoiseDist::Gaussian, 31)),
        ("rademacher", run(NoiseDist::Rademacher, 32)),
        ("uniform", run(NoiseDist::Uniform, 33)),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (&ests[i].1, &ests[j].1);
            let z = (a.j_hat - b.j_hat).abs() / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            worst = worst.max(z);
            ensure(z <= 4.0, || format!("{} vs {}: {z:.2} combined SE", ests[i].0, ests[j].0))?;
        }
    }
    let vals: Vec<String> = ests.iter().map(|(n, e)| format!("{n} {:.4}", e.j_hat)).collect();
    Ok(format!("{}; worst pair {worst:.2} SE", vals.join(", ")))
}

fn run_binary(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_noisy-consensus"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let d = dir.to_str().unwrap().to_owned();
        run_binary(&["report", "--output", &d, "--n-max", "30", "--exact-cap", "12", "--seed", "7", "--realizations", "2"])?;
        let sim = dir.join("simulate.csv");
        run_binary(&[
            "simulate", "--graph", "erdos-renyi", "--n-range", "6:8", "--k", "0.8", "--seed", "7",
            "--ensemble", "500", "--output", sim.to_str().unwrap(),
        ])?;
        runs.push(csv_files(&dir));
    }
    let (a, b) = (&runs[0], &runs[1]);
    ensure(a.len() == 8, || format!("expected 8 CSV files, got {}", a.len()))?;
    ensure(a.iter().map(|f| &f.0).eq(b.iter().map(|f| &f.0)), || "file sets differ".into())?;
    for ((name, x), (_, y)) in a.iter().zip(b) {
        ensure(x == y, || format!("{name} differs between runs"))?;
    }
    let bytes: usize = a.iter().map(|f| f.1.len()).sum();
    Ok(format!("{} CSVs ({bytes} bytes) byte-identical across two runs", a.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence", oracle_equivalence),
        ("bound sandwich", sandwich),
        ("two-node reference", reference_value),
        ("deterministic collapse", deterministic_collapse),
        ("Monte Carlo agreement", monte_carlo),
        ("star asymptotics", star_asymptotics),
        ("complete-graph limits", complete_limits),
        ("path growth", path_growth),
        ("closed-form cross-checks", closed_forms),
        ("distribution invariance", distribution_invariance),
        ("CSV determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
