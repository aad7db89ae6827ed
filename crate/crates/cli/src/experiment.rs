//! Graph construction and per-configuration row computation shared by all
//! subcommands.

use noisy_consensus::exec::Exec;
use noisy_consensus::graphs::{make_complete, make_erdos_renyi, make_grid, make_path, make_star, Family, UndirectedGraph};
use noisy_consensus::noise_index::{noise_report, NoiseReport, ReportOptions};
use noisy_consensus::ridl::RidlConfig;
use noisy_consensus::simulator::{default_horizon, estimate_noise_index, SimConfig};
use noisy_consensus::tol::{ER_MAX_ATTEMPTS, SANDWICH_SLACK};

use crate::args::{RandomGraphArgs, SimArgs, StepArgs};
use crate::table::Row;
use crate::CliError;

/// Step size as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Eps(f64),
    K(f64),
}

impl Step {
    /// Exactly one of `--eps` / `--k`; `default_k` applies when both are absent.
    pub fn from_args(args: &StepArgs, default_k: Option<f64>) -> Result<Step, CliError> {
        let step = match (args.eps, args.k, default_k) {
            (Some(e), None, _) => Step::Eps(e),
            (None, Some(k), _) => Step::K(k),
            (None, None, Some(k)) => Step::K(k),
            (None, None, None) => return Err(CliError::validation("exactly one of --eps or --k is required")),
            (Some(_), Some(_), _) => return Err(CliError::validation("--eps and --k are mutually exclusive")),
        };
        match step {
            Step::Eps(e) if !(e > 0.0 && e.is_finite()) => Err(CliError::validation(format!("--eps must be positive, got {e}"))),
            Step::K(k) if !(k > 0.0 && k < 1.0) => Err(CliError::validation(format!("--k must lie in (0, 1), got {k}"))),
            s => Ok(s),
        }
    }

    pub fn config(self, g: &UndirectedGraph, p: f64, sigma2: f64) -> Result<RidlConfig, CliError> {
        Ok(match self {
            Step::Eps(e) => RidlConfig::new(p, e, sigma2)?,
            Step::K(k) => RidlConfig::from_k(g, p, k, sigma2)?,
        })
    }
}

pub fn validate_p(p: f64) -> Result<(), CliError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("--p must lie in (0, 1], got {p}")))
    }
}

pub fn validate_sigma2(s: f64) -> Result<(), CliError> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(CliError::validation(format!("--sigma2 must be non-negative, got {s}")))
    }
}

pub fn validate_random(r: &RandomGraphArgs) -> Result<(), CliError> {
    if !(r.p_er > 0.0 && r.p_er <= 1.0) {
        return Err(CliError::validation(format!("--p-er must lie in (0, 1], got {}", r.p_er)));
    }
    if r.realizations == 0 {
        return Err(CliError::validation("--realizations must be at least 1"));
    }
    Ok(())
}

pub fn warn_small_p(p: f64) {
    if p < 0.1 {
        eprintln!("warning: p = {p} mixes slowly; exact solves and simulations may be ill-conditioned");
    }
}

/// A graph plus the bookkeeping columns that identify it.
#[derive(Debug, Clone)]
pub struct GraphInstance {
    pub graph: UndirectedGraph,
    pub label: String,
    pub requested_n: Option<usize>,
    pub realization: Option<usize>,
    pub graph_seed: Option<u64>,
    pub attempts: Option<usize>,
}

impl GraphInstance {
    pub fn plain(graph: UndirectedGraph, label: &str) -> Self {
        GraphInstance {
            graph,
            label: label.to_owned(),
            requested_n: None,
            realization: None,
            graph_seed: None,
            attempts: None,
        }
    }
}

/// Side length whose `d`-th power is nearest to `n` (at least 2).
pub fn nearest_side(n: usize, d: usize) -> usize {
    let guess = (n as f64).powf(1.0 / d as f64).round().max(2.0) as usize;
    (guess.saturating_sub(1).max(2)..=guess + 1)
        .min_by_key(|s| (s.pow(d as u32) as i64 - n as i64).unsigned_abs())
        .unwrap_or(2)
}

/// Largest side whose `d`-th power does not exceed `cap` (at least 2).
pub fn side_at_most(cap: usize, d: usize) -> usize {
    let mut s: usize = 2;
    while (s + 1).pow(d as u32) <= cap {
        s += 1;
    }
    s
}

/// Seed of realization `r` at size `n`, derived from the base seed with a
/// splitmix64 finalizer so neighbouring sizes get unrelated streams.
pub fn graph_seed(base: u64, n: usize, r: usize) -> u64 {
    let mut z = base ^ ((n as u64) << 32) ^ (r as u64);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds family member of (roughly) `n` nodes; grids round to the nearest
/// square or cube.
pub fn family_graph(family: Family, n: usize, random: &RandomGraphArgs, realization: usize) -> Result<GraphInstance, CliError> {
    let graph = match family {
        Family::Star => make_star(n)?,
        Family::Path => make_path(n)?,
        Family::Complete => make_complete(n)?,
        Family::Grid2d => make_grid(&[nearest_side(n, 2); 2])?,
        Family::Grid3d => make_grid(&[nearest_side(n, 3); 3])?,
        Family::ErdosRenyi => {
            let seed = graph_seed(random.seed, n, realization);
            let sample = make_erdos_renyi(n, random.p_er, seed, true, ER_MAX_ATTEMPTS)?;
            return Ok(GraphInstance {
                graph: sample.graph,
                label: family.name().to_owned(),
                requested_n: Some(n),
                realization: Some(realization),
                graph_seed: Some(sample.seed),
                attempts: Some(sample.attempts),
            });
        }
    };
    Ok(GraphInstance {
        requested_n: Some(n),
        ..GraphInstance::plain(graph, family.name())
    })
}

/// All instances of a family over the given sizes, with every Erdos-Renyi
/// realization.
pub fn family_instances(family: Family, sizes: impl IntoIterator<Item = usize>, random: &RandomGraphArgs) -> Result<Vec<GraphInstance>, CliError> {
    let reps = if family == Family::ErdosRenyi { random.realizations } else { 1 };
    let mut out = Vec::new();
    for n in sizes {
        for r in 0..reps {
            out.push(family_graph(family, n, random, r)?);
        }
    }
    Ok(out)
}

/// Bounds row, with exact columns filled when `exact_cap` admits the graph.
pub fn report_row(inst: &GraphInstance, cfg: &RidlConfig, exact_cap: usize) -> Result<(Row, NoiseReport), CliError> {
    let opts = ReportOptions {
        exact_cap,
        exec: Exec::default(),
    };
    let rep = noise_report(&inst.graph, cfg, &opts)?;
    let mut row = Row::new();
    row.set("N", rep.n)
        .set("family", inst.label.as_str())
        .set("p", rep.p)
        .set("eps", rep.epsilon)
        .set("k", rep.k)
        .set("sigma2", rep.sigma2)
        .set("j_lb", rep.j_lb)
        .set("j_ub", rep.j_ub)
        .set("j_res_lb", rep.j_res_lb)
        .set("j_res_ub", rep.j_res_ub)
        .set("r_ave", rep.r_ave)
        .set("d_max", rep.d_max)
        .set("lambda2", rep.lambda2)
        .set("lambdaN", rep.lambda_n)
        .set("requested_n", inst.requested_n)
        .set("realization", inst.realization)
        .set("graph_seed", inst.graph_seed)
        .set("attempts", inst.attempts);
    if exact_cap > 0 {
        let rel = rep.relative_errors();
        row.set("j_exact", rep.j_exact)
            .set("rel_lb", rel.map(|r| r.0))
            .set("rel_ub", rel.map(|r| r.1));
    }
    Ok((row, rep))
}

pub fn simulate_row(
    inst: &GraphInstance,
    cfg: &RidlConfig,
    exact_cap: usize,
    sim: &SimArgs,
    seed: u64,
) -> Result<(Row, NoiseReport, bool), CliError> {
    let (mut row, rep) = report_row(inst, cfg, exact_cap)?;
    let horizon = match sim.horizon {
        Some(h) => h,
        None => default_horizon(&inst.graph, cfg)?,
    };
    let mut sc = SimConfig::new(horizon, sim.ensemble, seed);
    sc.noise = sim.noise.into();
    let est = estimate_noise_index(&inst.graph, cfg, &sc)?;
    row.set("j_hat", est.j_hat)
        .set("std_error", est.std_error)
        .set("converged", est.converged)
        .set("drift", est.drift)
        .set("horizon", est.horizon)
        .set("ensemble", est.samples_used)
        .set("noise", sc.noise.name())
        .set("sim_seed", est.seed);
    Ok((row, rep, est.converged))
}

/// Runs `jobs` on the worker pool; results come back in job order.
pub fn run_jobs<J, T, F>(jobs: &[J], f: F) -> Result<Vec<T>, CliError>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> Result<T, CliError> + Sync + Send,
{
    Exec::default().map_indexed(jobs.len(), |i| f(&jobs[i])).into_iter().collect()
}

/// Bound-chain violations across rows, formatted for diagnostics.
pub fn chain_violations<'a>(reports: impl IntoIterator<Item = (&'a str, &'a NoiseReport)>) -> Vec<String> {
    reports
        .into_iter()
        .filter_map(|(label, r)| r.check_chain(SANDWICH_SLACK).err().map(|e| format!("{label} N={}: {e}", r.n)))
        .collect()
}

/// Parameters shared by the sweep subcommands and the report.
#[derive(Debug, Clone)]
pub struct SweepSetup {
    pub step: Step,
    pub sigma2: f64,
    pub random: RandomGraphArgs,
    pub exact_cap: usize,
}

pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub violations: Vec<String>,
}

/// Rows for one family over a size range at fixed p.
pub fn sweep_n(families: &[Family], sizes: &[usize], p: f64, setup: &SweepSetup) -> Result<SweepOutput, CliError> {
    let mut instances = Vec::new();
    for &f in families {
        instances.extend(family_instances(f, sizes.iter().copied(), &setup.random)?);
    }
    let results = run_jobs(&instances, |inst| {
        let cfg = setup.step.config(&inst.graph, p, setup.sigma2)?;
        report_row(inst, &cfg, setup.exact_cap)
    })?;
    let violations = chain_violations(instances.iter().zip(&results).map(|(i, (_, r))| (i.label.as_str(), r)));
    Ok(SweepOutput {
        rows: results.into_iter().map(|(row, _)| row).collect(),
        violations,
    })
}

/// Rows for each (family, p). When `n` exceeds the exact cap, each bounds
/// row is followed by a row at the largest family size within the cap that
/// carries the exact value; its `requested_n` records the substitution.
pub fn sweep_p(families: &[Family], n: usize, p_grid: &[f64], setup: &SweepSetup) -> Result<SweepOutput, CliError> {
    let mut jobs: Vec<(GraphInstance, f64)> = Vec::new();
    for &f in families {
        let mut graphs = family_instances(f, [n], &setup.random)?;
        let full_n = graphs[0].graph.n();
        if full_n > setup.exact_cap && setup.exact_cap >= 3 {
            let reduced = match f {
                Family::Grid2d => side_at_most(setup.exact_cap, 2).pow(2),
                Family::Grid3d => side_at_most(setup.exact_cap, 3).pow(3),
                _ => setup.exact_cap,
            };
            let mut small = family_instances(f, [reduced], &setup.random)?;
            for inst in &mut small {
                inst.requested_n = Some(n);
            }
            graphs = graphs.into_iter().zip(small).flat_map(|(a, b)| [a, b]).collect();
        }
        for &p in p_grid {
            jobs.extend(graphs.iter().map(|g| (g.clone(), p)));
        }
    }
    let results = run_jobs(&jobs, |(inst, p)| {
        let cfg = setup.step.config(&inst.graph, *p, setup.sigma2)?;
        report_row(inst, &cfg, setup.exact_cap)
    })?;
    let violations = chain_violations(jobs.iter().zip(&results).map(|((i, _), (_, r))| (i.label.as_str(), r)));
    Ok(SweepOutput {
        rows: results.into_iter().map(|(row, _)| row).collect(),
        violations,
    })
}
