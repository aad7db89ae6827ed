use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisy_consensus::graphs::Family;
use noisy_consensus::simulator::NoiseDist;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "noisy-consensus",
    version,
    about = "Noise index of randomized Laplacian consensus: exact values, bounds and Monte Carlo estimates",
    long_about = "Every flag can also be set through an environment variable named \
                  NOISY_CONSENSUS_<FLAG> (upper case, dashes as underscores)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Laplacian and resistance bounds, one row per graph.
    Bounds(PointArgs),
    /// Exact noise index with relative errors of the bounds.
    Exact(PointArgs),
    /// Monte Carlo estimate next to the exact value and bounds.
    Simulate(SimulateArgs),
    /// Bounds (and exact values up to the cap) across families and sizes.
    SweepN(SweepNArgs),
    /// Bounds across activation probabilities at a fixed size.
    SweepP(SweepPArgs),
    /// Full sweep suite written to a directory with a manifest.
    Report(ReportArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Star,
    Path,
    #[value(name = "grid2d")]
    Grid2d,
    #[value(name = "grid3d")]
    Grid3d,
    Complete,
    #[value(name = "erdos-renyi")]
    ErdosRenyi,
    File,
}

impl GraphKind {
    pub fn family(self) -> Option<Family> {
        match self {
            GraphKind::Star => Some(Family::Star),
            GraphKind::Path => Some(Family::Path),
            GraphKind::Grid2d => Some(Family::Grid2d),
            GraphKind::Grid3d => Some(Family::Grid3d),
            GraphKind::Complete => Some(Family::Complete),
            GraphKind::ErdosRenyi => Some(Family::ErdosRenyi),
            GraphKind::File => None,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseArg {
    #[default]
    Gaussian,
    Rademacher,
    Uniform,
}

impl From<NoiseArg> for NoiseDist {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Gaussian => NoiseDist::Gaussian,
            NoiseArg::Rademacher => NoiseDist::Rademacher,
            NoiseArg::Uniform => NoiseDist::Uniform,
        }
    }
}

/// Inclusive size range `A:B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
}

impl NRange {
    pub fn sizes(self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

/// Grid side lengths `AxB[xC]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

/// Arithmetic grid `START:STOP:STEP`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct PGrid(pub Vec<f64>);

pub fn parse_n_range(s: &str) -> Result<NRange, String> {
    let (a, b) = s.split_once(':').ok_or("expected A:B")?;
    let start: usize = a.trim().parse().map_err(|e| format!("bad start `{a}`: {e}"))?;
    let end: usize = b.trim().parse().map_err(|e| format!("bad end `{b}`: {e}"))?;
    if start > end {
        return Err(format!("empty range {start}:{end}"));
    }
    Ok(NRange { start, end })
}

pub fn parse_dims(s: &str) -> Result<Dims, String> {
    let dims = s
        .split('x')
        .map(|d| d.trim().parse::<usize>().map_err(|e| format!("bad side `{d}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if dims.is_empty() || dims.len() > 3 {
        return Err(format!("expected 1 to 3 sides, got {}", dims.len()));
    }
    Ok(Dims(dims))
}

pub fn parse_p_grid(s: &str) -> Result<PGrid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad number `{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err("expected START:STOP:STEP".into());
    };
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(format!("invalid grid {s}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(format!("grid {s} has {count} points"));
    }
    // start + i*step, rounded to 12 decimals so 0.1:0.9:0.1 yields 0.3 rather than 0.30000000000000004
    let values = (0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect();
    Ok(PGrid(values))
}

pub fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Graph family, or `file` for an edge list.
    #[arg(long, env = "NOISY_CONSENSUS_GRAPH", value_enum)]
    pub graph: GraphKind,
    /// Edge-list file: first line `n m`, then one `i j` pair per line.
    #[arg(long, env = "NOISY_CONSENSUS_GRAPH_FILE", required_if_eq("graph", "file"))]
    pub graph_file: Option<PathBuf>,
    /// Number of nodes (grids use the nearest square or cube).
    #[arg(long, env = "NOISY_CONSENSUS_N", conflicts_with = "n_range")]
    pub n: Option<usize>,
    /// Inclusive size range A:B, one row per size.
    #[arg(long, env = "NOISY_CONSENSUS_N_RANGE", value_parser = parse_n_range)]
    pub n_range: Option<NRange>,
    /// Explicit grid sides, e.g. 4x5 or 3x3x3.
    #[arg(long, env = "NOISY_CONSENSUS_DIMS", value_parser = parse_dims)]
    pub dims: Option<Dims>,
    #[command(flatten)]
    pub random: RandomGraphArgs,
}

#[derive(Args, Debug, Clone)]
pub struct RandomGraphArgs {
    /// Edge probability for Erdos-Renyi graphs.
    #[arg(long, env = "NOISY_CONSENSUS_P_ER", default_value_t = 0.5)]
    pub p_er: f64,
    /// Base seed for random graphs and simulation.
    #[arg(long, env = "NOISY_CONSENSUS_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Erdos-Renyi draws per size, one row each.
    #[arg(long, env = "NOISY_CONSENSUS_REALIZATIONS", default_value_t = 1)]
    pub realizations: usize,
}

#[derive(Args, Debug, Clone)]
pub struct StepArgs {
    /// Step size epsilon.
    #[arg(long, env = "NOISY_CONSENSUS_EPS", conflicts_with = "k")]
    pub eps: Option<f64>,
    /// Normalized step size k = eps * d_max.
    #[arg(long, env = "NOISY_CONSENSUS_K")]
    pub k: Option<f64>,
    /// Noise variance.
    #[arg(long, env = "NOISY_CONSENSUS_SIGMA2", default_value_t = 1.0)]
    pub sigma2: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file (standard output when absent).
    #[arg(long, env = "NOISY_CONSENSUS_OUTPUT")]
    pub output: Option<PathBuf>,
    #[arg(long, env = "NOISY_CONSENSUS_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Fail on bound-chain violations and unconverged simulations.
    #[arg(long, env = "NOISY_CONSENSUS_STRICT")]
    pub strict: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Activation probability.
    #[arg(long, env = "NOISY_CONSENSUS_P", default_value_t = 0.9)]
    pub p: f64,
    #[command(flatten)]
    pub step: StepArgs,
    /// Largest N for the exact solve.
    #[arg(long, env = "NOISY_CONSENSUS_EXACT_CAP", default_value_t = 64)]
    pub exact_cap: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    /// Time steps per replication (derived from the spectral gap when absent).
    #[arg(long, env = "NOISY_CONSENSUS_HORIZON")]
    pub horizon: Option<usize>,
    /// Independent replications.
    #[arg(long, env = "NOISY_CONSENSUS_ENSEMBLE", default_value_t = 2000)]
    pub ensemble: usize,
    #[arg(long, env = "NOISY_CONSENSUS_NOISE", value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SweepNArgs {
    /// Comma-separated families.
    #[arg(long, env = "NOISY_CONSENSUS_FAMILIES", value_delimiter = ',', value_parser = parse_family,
          default_value = "star,path,grid2d,grid3d,complete,erdos-renyi")]
    pub families: Vec<Family>,
    #[arg(long, env = "NOISY_CONSENSUS_N_RANGE", value_parser = parse_n_range, default_value = "3:100")]
    pub n_range: NRange,
    #[arg(long, env = "NOISY_CONSENSUS_P", default_value_t = 0.9)]
    pub p: f64,
    #[command(flatten)]
    pub step: StepArgs,
    #[command(flatten)]
    pub random: RandomGraphArgs,
    #[arg(long, env = "NOISY_CONSENSUS_EXACT_CAP", default_value_t = 30)]
    pub exact_cap: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SweepPArgs {
    #[arg(long, env = "NOISY_CONSENSUS_FAMILIES", value_delimiter = ',', value_parser = parse_family,
          default_value = "star,path,grid2d,grid3d,complete,erdos-renyi")]
    pub families: Vec<Family>,
    #[arg(long, env = "NOISY_CONSENSUS_N", default_value_t = 100)]
    pub n: usize,
    /// Activation probabilities START:STOP:STEP.
    #[arg(long, env = "NOISY_CONSENSUS_P_GRID", value_parser = parse_p_grid, default_value = "0.1:0.9:0.1")]
    pub p_grid: PGrid,
    #[command(flatten)]
    pub step: StepArgs,
    #[command(flatten)]
    pub random: RandomGraphArgs,
    /// Exact values are computed at the largest size not above this cap.
    #[arg(long, env = "NOISY_CONSENSUS_EXACT_CAP", default_value_t = 30)]
    pub exact_cap: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Output directory (created when missing).
    #[arg(long, env = "NOISY_CONSENSUS_OUTPUT")]
    pub output: PathBuf,
    /// Largest requested size in the N sweeps; also the size of the p sweep.
    #[arg(long, env = "NOISY_CONSENSUS_N_MAX", default_value_t = 100)]
    pub n_max: usize,
    #[arg(long, env = "NOISY_CONSENSUS_P", default_value_t = 0.9)]
    pub p: f64,
    #[arg(long, env = "NOISY_CONSENSUS_P_GRID", value_parser = parse_p_grid, default_value = "0.1:0.9:0.1")]
    pub p_grid: PGrid,
    #[command(flatten)]
    pub step: StepArgs,
    #[command(flatten)]
    pub random: RandomGraphArgs,
    #[arg(long, env = "NOISY_CONSENSUS_EXACT_CAP", default_value_t = 30)]
    pub exact_cap: usize,
}
