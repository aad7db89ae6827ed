//! Command-line experiments over the `noisy_consensus` library: bound curves
//! against N, relative errors of the bounds, p sweeps and Monte Carlo checks,
//! written as CSV or JSON.

pub mod args;
pub mod experiment;
pub mod report;
pub mod table;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use noisy_consensus::graphs::{make_grid, Family, UndirectedGraph};
use noisy_consensus::Error;

use args::{Cli, Command, GraphArgs, GraphKind, OutputArgs, PointArgs, SimulateArgs, SweepNArgs, SweepPArgs};
use experiment::{
    chain_violations, family_instances, report_row, run_jobs, simulate_row, sweep_n, sweep_p, validate_p, validate_random,
    validate_sigma2, warn_small_p, GraphInstance, Step, SweepSetup,
};
use table::{write_rows, Row, Schema};

/// Exit codes: 2 validation, 3 numerical failure, 4 I/O.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument { .. }
            | Error::DimensionMismatch { .. }
            | Error::TooLarge { .. }
            | Error::KronTooLarge { .. }
            | Error::Parse { .. }
            | Error::ConsensusConditions(_) => CliError::Validation(e.to_string()),
            Error::Disconnected { .. } => CliError::Validation(format!("{e}; the graph must be connected")),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds(a) => run_point(&a, Schema::Bounds),
        Command::Exact(a) => run_point(&a, Schema::Exact),
        Command::Simulate(a) => run_simulate(&a),
        Command::SweepN(a) => run_sweep_n(&a),
        Command::SweepP(a) => run_sweep_p(&a),
        Command::Report(a) => {
            let summary = report::run_report(&a)?;
            for (name, rows) in &summary.files {
                eprintln!("wrote {} ({rows} rows)", summary.dir.join(name).display());
            }
            report_violations(&summary.violations, false)
        }
    }
}

/// Graphs selected by `--graph` and its sizing flags.
pub fn graph_instances(g: &GraphArgs) -> Result<Vec<GraphInstance>, CliError> {
    validate_random(&g.random)?;
    if g.graph == GraphKind::File {
        let path = g.graph_file.as_ref().ok_or_else(|| CliError::validation("--graph file needs --graph-file"))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let graph = UndirectedGraph::parse_edge_list(&text)?;
        return Ok(vec![GraphInstance::plain(graph, "file")]);
    }
    let family = g.graph.family().expect("non-file graph kinds map to a family");
    if let Some(dims) = &g.dims {
        let want = match family {
            Family::Grid2d => 2,
            Family::Grid3d => 3,
            _ => return Err(CliError::validation("--dims applies to grid2d and grid3d only")),
        };
        if dims.0.len() != want {
            return Err(CliError::validation(format!("--dims for {family} needs {want} sides, got {}", dims.0.len())));
        }
        return Ok(vec![GraphInstance::plain(make_grid(&dims.0)?, family.name())]);
    }
    let sizes: Vec<usize> = match (g.n, g.n_range) {
        (Some(n), None) => vec![n],
        (None, Some(r)) => r.sizes().collect(),
        _ => return Err(CliError::validation("one of --n, --n-range or --dims is required")),
    };
    family_instances(family, sizes, &g.random)
}

fn validate_point(a: &PointArgs) -> Result<Step, CliError> {
    validate_p(a.p)?;
    validate_sigma2(a.step.sigma2)?;
    warn_small_p(a.p);
    Step::from_args(&a.step, None)
}

fn run_point(a: &PointArgs, schema: Schema) -> Result<(), CliError> {
    let step = validate_point(a)?;
    let instances = graph_instances(&a.graph)?;
    let cap = if schema == Schema::Bounds { 0 } else { a.exact_cap };
    if schema == Schema::Exact {
        if let Some(big) = instances.iter().find(|i| i.graph.n() > cap) {
            return Err(CliError::validation(format!(
                "N = {} exceeds --exact-cap {cap}; raise the cap or use `bounds` for bounds-only output",
                big.graph.n()
            )));
        }
    }
    let results = run_jobs(&instances, |inst| report_row(inst, &step.config(&inst.graph, a.p, a.step.sigma2)?, cap))?;
    let violations = chain_violations(instances.iter().zip(&results).map(|(i, (_, r))| (i.label.as_str(), r)));
    let rows: Vec<Row> = results.into_iter().map(|(r, _)| r).collect();
    emit(&a.out, schema, &rows)?;
    report_violations(&violations, a.out.strict)
}

fn run_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let step = validate_point(&a.point)?;
    if a.sim.ensemble == 0 {
        return Err(CliError::validation("--ensemble must be at least 1"));
    }
    if a.sim.horizon == Some(0) {
        return Err(CliError::validation("--horizon must be at least 1"));
    }
    let instances = graph_instances(&a.point.graph)?;
    let seed = a.point.graph.random.seed;
    let results = run_jobs(&instances, |inst| {
        let cfg = step.config(&inst.graph, a.point.p, a.point.step.sigma2)?;
        simulate_row(inst, &cfg, a.point.exact_cap, &a.sim, seed)
    })?;
    let violations = chain_violations(instances.iter().zip(&results).map(|(i, (_, r, _))| (i.label.as_str(), r)));
    let unconverged: Vec<usize> = results.iter().filter(|(_, _, c)| !c).map(|(_, r, _)| r.n).collect();
    let rows: Vec<Row> = results.into_iter().map(|(r, _, _)| r).collect();
    emit(&a.point.out, Schema::Simulate, &rows)?;
    if !unconverged.is_empty() {
        let msg = format!("simulation not stationary for N = {unconverged:?}; increase --horizon");
        if a.point.out.strict {
            return Err(CliError::numerical(msg));
        }
        eprintln!("warning: {msg}");
    }
    report_violations(&violations, a.point.out.strict)
}

fn sweep_setup(step: &args::StepArgs, random: &args::RandomGraphArgs, exact_cap: usize) -> Result<SweepSetup, CliError> {
    validate_sigma2(step.sigma2)?;
    validate_random(random)?;
    Ok(SweepSetup {
        step: Step::from_args(step, None)?,
        sigma2: step.sigma2,
        random: random.clone(),
        exact_cap,
    })
}

fn run_sweep_n(a: &SweepNArgs) -> Result<(), CliError> {
    validate_p(a.p)?;
    warn_small_p(a.p);
    let setup = sweep_setup(&a.step, &a.random, a.exact_cap)?;
    if a.families.is_empty() {
        return Err(CliError::validation("--families is empty"));
    }
    let sizes: Vec<usize> = a.n_range.sizes().collect();
    let out = sweep_n(&a.families, &sizes, a.p, &setup)?;
    emit(&a.out, Schema::Exact, &out.rows)?;
    report_violations(&out.violations, a.out.strict)
}

fn run_sweep_p(a: &SweepPArgs) -> Result<(), CliError> {
    let setup = sweep_setup(&a.step, &a.random, a.exact_cap)?;
    if a.families.is_empty() {
        return Err(CliError::validation("--families is empty"));
    }
    for &p in &a.p_grid.0 {
        validate_p(p)?;
        warn_small_p(p);
    }
    let out = sweep_p(&a.families, a.n, &a.p_grid.0, &setup)?;
    emit(&a.out, Schema::Exact, &out.rows)?;
    report_violations(&out.violations, a.out.strict)
}

fn report_violations(violations: &[String], strict: bool) -> Result<(), CliError> {
    if violations.is_empty() {
        return Ok(());
    }
    let msg = format!("bound chain violated: {}", violations.join("; "));
    if strict {
        Err(CliError::numerical(msg))
    } else {
        eprintln!("warning: {msg}");
        Ok(())
    }
}

fn emit(out: &OutputArgs, schema: Schema, rows: &[Row]) -> Result<(), CliError> {
    match &out.output {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            write_rows(&mut w, out.format, schema, rows).map_err(|e| CliError::io(path, e))?;
            w.flush().map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            write_rows(stdout.lock(), out.format, schema, rows).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
