//! Monte Carlo estimate of the noise index.
//!
//! Each replication starts from `x(0) = 0` and runs `x(t+1) = P(t) x(t) + n(t)`
//! for `horizon` steps with fresh activations and noise. Replication `r`
//! draws from ChaCha8 stream `r` of the master seed, and replications are
//! grouped into fixed batches whose partial sums are combined in batch
//! order, so parallel and sequential runs agree bit for bit.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::graphs::{laplacian_spectrum, UndirectedGraph};
use crate::ridl::{check_consensus_conditions, ridl_apply, sample_activation, RidlConfig, StochasticMatrixSample};

/// Replications per work item.
const BATCH: usize = 256;

/// Upper limit for the automatically chosen horizon.
pub const MAX_HORIZON: usize = 100_000;

/// Zero-mean noise laws, each scaled to variance `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDist {
    #[default]
    Gaussian,
    /// `±σ` with equal probability.
    Rademacher,
    /// Uniform on `[-σ√3, σ√3]`.
    Uniform,
}

impl NoiseDist {
    pub fn name(self) -> &'static str {
        match self {
            NoiseDist::Gaussian => "gaussian",
            NoiseDist::Rademacher => "rademacher",
            NoiseDist::Uniform => "uniform",
        }
    }

    /// One draw with standard deviation `sigma`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(self, sigma: f64, rng: &mut R) -> f64 {
        match self {
            NoiseDist::Gaussian => sigma * rng.sample::<f64, _>(StandardNormal),
            NoiseDist::Rademacher => {
                if rng.random_bool(0.5) {
                    sigma
                } else {
                    -sigma
                }
            }
            NoiseDist::Uniform => sigma * 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

impl FromStr for NoiseDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseDist::Gaussian),
            "rademacher" => Ok(NoiseDist::Rademacher),
            "uniform" => Ok(NoiseDist::Uniform),
            other => Err(invalid("noise", format!("unknown noise distribution `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Steps per replication.
    pub horizon: usize,
    /// Number of independent replications.
    pub ensemble: usize,
    pub noise: NoiseDist,
    /// Largest relative drift of the ensemble mean over the final tenth of
    /// the horizon for the run to count as stationary.
    pub burn_in_check: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl SimConfig {
    pub fn new(horizon: usize, ensemble: usize, seed: u64) -> Self {
        Self {
            horizon,
            ensemble,
            noise: NoiseDist::Gaussian,
            burn_in_check: 0.05,
            seed,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be >= 1"));
        }
        if self.ensemble == 0 {
            return Err(invalid("ensemble", "must be >= 1"));
        }
        if self.burn_in_check.is_nan() || self.burn_in_check <= 0.0 {
            return Err(invalid("burn_in_check", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub j_hat: f64,
    pub std_error: f64,
    pub samples_used: usize,
    pub horizon: usize,
    pub converged: bool,
    /// Relative drift measured by the stationarity check.
    pub drift: f64,
    pub seed: u64,
    /// Ensemble mean of `||x(t) - mean(x(t)) 1||² / N` for `t = 1..=horizon`.
    #[serde(skip)]
    pub mean_curve: Vec<f64>,
}

/// `P x + n`.
pub fn step(x: &[f64], p_sample: &StochasticMatrixSample, noise: &[f64]) -> Result<Vec<f64>> {
    if noise.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: noise.len(),
        });
    }
    let mut y = p_sample.matrix.matvec(x)?;
    y.iter_mut().zip(noise).for_each(|(a, b)| *a += b);
    Ok(y)
}

/// `||x - mean(x) 1||²`.
pub fn disagreement(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// Smallest horizon after which the slowest second-moment mode, bounded by
/// the largest non-consensus eigenvalue of `E[P^2]`, has decayed below
/// `1e-4`; capped at [`MAX_HORIZON`].
pub fn default_horizon(g: &UndirectedGraph, cfg: &RidlConfig) -> Result<usize> {
    let spectrum = laplacian_spectrum(g)?;
    let (p, e) = (cfg.p, cfg.epsilon);
    let rate = spectrum.eigenvalues[1..]
        .iter()
        .map(|&l| 1.0 - e * p * p * (2.0 * (1.0 + e * p - e) * l - e * p * l * l))
        .fold(0.0_f64, f64::max);
    if rate.is_nan() || rate >= 1.0 {
        return Ok(MAX_HORIZON);
    }
    if rate <= 0.0 {
        return Ok(1);
    }
    let t = (1e-4_f64.ln() / rate.ln()).ceil();
    Ok((t as usize).clamp(1, MAX_HORIZON))
}

struct BatchSums {
    curve: Vec<f64>,
    sum: f64,
    sum_sq: f64,
}

/// Ensemble estimate of the noise index.
pub fn estimate_noise_index(g: &UndirectedGraph, cfg: &RidlConfig, sim: &SimConfig) -> Result<SimEstimate> {
    sim.validate()?;
    check_consensus_conditions(g, cfg).into_result()?;
    let n = g.n();
    let sigma = cfg.sigma2.sqrt();
    let m = sim.ensemble;
    let t_max = sim.horizon;
    let batches = m.div_ceil(BATCH);

    let partials = sim.exec.map_indexed(batches, |b| {
        let mut acc = BatchSums {
            curve: vec![0.0; t_max],
            sum: 0.0,
            sum_sq: 0.0,
        };
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for r in (b * BATCH)..((b + 1) * BATCH).min(m) {
            let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
            rng.set_stream(r as u64);
            x.fill(0.0);
            for slot in acc.curve.iter_mut() {
                let pattern = sample_activation(n, cfg.p, &mut rng);
                ridl_apply(g, cfg.epsilon, &pattern, &x, &mut y);
                for v in y.iter_mut() {
                    *v += sim.noise.sample(sigma, &mut rng);
                }
                std::mem::swap(&mut x, &mut y);
                *slot += disagreement(&x) / n as f64;
            }
            let last = disagreement(&x) / n as f64;
            acc.sum += last;
            acc.sum_sq += last * last;
        }
        acc
    });

    let mut curve = vec![0.0; t_max];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for part in &partials {
        curve.iter_mut().zip(&part.curve).for_each(|(c, v)| *c += v);
        sum += part.sum;
        sum_sq += part.sum_sq;
    }
    let mf = m as f64;
    curve.iter_mut().for_each(|c| *c /= mf);
    let j_hat = sum / mf;
    let std_error = if m > 1 {
        let var = ((sum_sq - mf * j_hat * j_hat) / (mf - 1.0)).max(0.0);
        (var / mf).sqrt()
    } else {
        0.0
    };
    let (converged, drift) = stationarity(&curve, sim.burn_in_check);
    Ok(SimEstimate {
        j_hat,
        std_error,
        samples_used: m,
        horizon: t_max,
        converged,
        drift,
        seed: sim.seed,
        mean_curve: curve,
    })
}

/// Compares the mean of the final tenth of the curve with the tenth before it.
fn stationarity(curve: &[f64], threshold: f64) -> (bool, f64) {
    let t = curve.len();
    let window = (t / 10).max(1);
    if t < 2 * window {
        return (curve.iter().all(|&c| c == 0.0), f64::NAN);
    }
    let avg = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let last = avg(&curve[t - window..]);
    let prev = avg(&curve[t - 2 * window..t - window]);
    if last == 0.0 {
        return (prev == 0.0, 0.0);
    }
    let drift = (last - prev).abs() / last;
    (drift < threshold, drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::make_complete;
    use crate::linalg::DenseMatrix;
    use crate::ridl::ActivationPattern;

    fn sample(m: DenseMatrix) -> StochasticMatrixSample {
        let n = m.rows();
        StochasticMatrixSample {
            matrix: m,
            pattern: ActivationPattern::all_active(n),
        }
    }

    #[test]
    fn step_examples() {
        let id = sample(DenseMatrix::identity(3));
        assert_eq!(step(&[0.0; 3], &id, &[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(step(&[1.0, 2.0, 3.0], &id, &[0.0; 3]).unwrap(), vec![1.0, 2.0, 3.0]);
        let p = sample(DenseMatrix::from_rows(&[&[0.6, 0.4], &[0.4, 0.6]]));
        let y = step(&[1.0, 0.0], &p, &[0.0, 0.0]).unwrap();
        assert!((y[0] - 0.6).abs() < 1e-15 && (y[1] - 0.4).abs() < 1e-15);
        assert!(step(&[1.0, 0.0], &p, &[0.0]).is_err());
    }

    #[test]
    fn disagreement_examples() {
        assert_eq!(disagreement(&[2.5; 4]), 0.0);
        assert_eq!(disagreement(&[1.0, -1.0]), 2.0);
        assert_eq!(disagreement(&[1.0, 2.0, 3.0]), 2.0);
    }

    #[test]
    fn noise_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dist in [NoiseDist::Gaussian, NoiseDist::Rademacher, NoiseDist::Uniform] {
            let draws: Vec<f64> = (0..200_000).map(|_| dist.sample(2.0, &mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            let var = draws.iter().map(|x| x * x).sum::<f64>() / draws.len() as f64;
            assert!(mean.abs() < 0.03, "{dist:?} mean {mean}");
            assert!((var - 4.0).abs() < 0.08, "{dist:?} var {var}");
        }
    }

    #[test]
    fn zero_noise_stays_at_zero() {
        let g = make_complete(3).unwrap();
        let cfg = RidlConfig::new(0.5, 0.3, 0.0).unwrap();
        let est = estimate_noise_index(&g, &cfg, &SimConfig::new(50, 100, 1)).unwrap();
        assert_eq!(est.j_hat, 0.0);
        assert_eq!(est.std_error, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn rejects_bad_configs() {
        let g = make_complete(3).unwrap();
        let cfg = RidlConfig::new(0.5, 0.3, 1.0).unwrap();
        assert!(estimate_noise_index(&g, &cfg, &SimConfig::new(0, 10, 1)).is_err());
        assert!(estimate_noise_index(&g, &cfg, &SimConfig::new(10, 0, 1)).is_err());
        let bad = RidlConfig::new(0.5, 0.6, 1.0).unwrap();
        assert!(matches!(
            estimate_noise_index(&g, &bad, &SimConfig::new(10, 10, 1)),
            Err(Error::ConsensusConditions(_))
        ));
    }

    #[test]
    fn horizon_rule() {
        let g = make_complete(2).unwrap();
        let cfg = RidlConfig::new(0.5, 0.4, 1.0).unwrap();
        // slowest rate is lambda_2(E[P^2]) = 0.76
        let want = (1e-4_f64.ln() / 0.76_f64.ln()).ceil() as usize;
        assert_eq!(default_horizon(&g, &cfg).unwrap(), want);
    }

    #[test]
    fn noise_names() {
        for d in [NoiseDist::Gaussian, NoiseDist::Rademacher, NoiseDist::Uniform] {
            assert_eq!(d.name().parse::<NoiseDist>().unwrap(), d);
        }
        assert!("cauchy".parse::<NoiseDist>().is_err());
    }
}
