//! Steady-state noise index: the exact value from the lifted second-moment
//! system, the spectral bounds from `E[P]` and `E[P^2]`, their Laplacian
//! forms for RIDL matrices, the effective-resistance envelope, and the
//! closed forms for the standard graph families.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::graphs::{average_effective_resistance, closed_form, laplacian_spectrum, Family, UndirectedGraph};
use crate::linalg::{solve_with, sym_eigen, DenseMatrix, SpectralData};
use crate::ridl::{check_consensus_conditions, ExpectedOperators, KOptions, RidlConfig};
use crate::tol;

/// Lower/upper pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// Exact noise index `(σ²/N) (vec(I)ᵀ (I - K)^{-1} vec(I) - 1)`, evaluated
/// with a linear solve.
pub fn exact_noise_index(ops: &ExpectedOperators, sigma2: f64) -> Result<f64> {
    exact_noise_index_with(ops, sigma2, Exec::default())
}

pub fn exact_noise_index_with(ops: &ExpectedOperators, sigma2: f64, exec: Exec) -> Result<f64> {
    exact_from_k(&ops.k_op, sigma2, exec).map_err(|e| match e {
        Error::Singular { .. } => Error::SlowMixing {
            k_norm: ops.k_norm_estimate(),
        },
        other => other,
    })
}

/// Same as [`exact_noise_index`] for a bare `N² x N²` operator.
pub fn exact_from_k(k_op: &DenseMatrix, sigma2: f64, exec: Exec) -> Result<f64> {
    let nn = k_op.rows();
    let n = (nn as f64).sqrt().round() as usize;
    if n * n != nn || !k_op.is_square() {
        return Err(invalid("k_op", format!("expected an N^2 x N^2 matrix, got {}x{}", nn, k_op.cols())));
    }
    let mut system = k_op.scale(-1.0);
    for d in 0..nn {
        system[(d, d)] += 1.0;
    }
    let vec_i = DenseMatrix::identity(n).vec();
    let y = solve_with(&system, &vec_i, exec)?;
    let quad: f64 = vec_i.iter().zip(&y).map(|(a, b)| a * b).sum();
    Ok(sigma2 / n as f64 * (quad - 1.0))
}

/// Eigenvalues of a symmetric averaging matrix with the Perron eigenvalue
/// (the largest, for the consensus direction) removed by index.
fn non_consensus_eigenvalues(m: &DenseMatrix, what: &'static str) -> Result<Vec<f64>> {
    let spec = sym_eigen(m)?;
    let n = spec.len();
    if n < 2 {
        return Err(invalid(what, "need at least two nodes"));
    }
    let top = spec.max();
    if (top - 1.0).abs() > 1e-9 {
        return Err(invalid(what, format!("largest eigenvalue {top} is not 1; matrix is not stochastic")));
    }
    let second = spec.eigenvalues[n - 2];
    if second >= 1.0 - tol::PERRON_GAP {
        return Err(Error::Disconnected { lambda2: 1.0 - second });
    }
    let mut vals = spec.eigenvalues;
    vals.pop();
    Ok(vals)
}

/// Bounds from the spectra of `E[P]` and `E[P^2]`:
/// `(σ²/N) Σ 1/(1 - λ_i(E[P])²)` and `(σ²/N) Σ 1/(1 - λ_i(E[P²]))`,
/// both over the `N - 1` non-consensus eigenvalues.
pub fn generic_bounds(p_bar: &DenseMatrix, p_bbar: &DenseMatrix, sigma2: f64) -> Result<Bounds> {
    let n = p_bar.rows() as f64;
    let mean = non_consensus_eigenvalues(p_bar, "p_bar")?;
    let square = non_consensus_eigenvalues(p_bbar, "p_bbar")?;
    let lower = sigma2 / n * mean.iter().map(|l| 1.0 / (1.0 - l * l)).sum::<f64>();
    let upper = sigma2 / n * square.iter().map(|l| 1.0 / (1.0 - l)).sum::<f64>();
    Ok(Bounds { lower, upper })
}

/// RIDL bounds from the Laplacian spectrum:
///
/// ```text
/// lower = σ²/(ε p² N) Σ_{i≥2} 1 / (2λ_i - ε p² λ_i²)
/// upper = σ²/(ε p² N) Σ_{i≥2} 1 / (2(1 + ε p - ε) λ_i - ε p λ_i²)
/// ```
pub fn ridl_bounds(laplacian_spectrum: &SpectralData, cfg: &RidlConfig) -> Result<Bounds> {
    let vals = &laplacian_spectrum.eigenvalues;
    if !crate::graphs::spectrum_is_connected(laplacian_spectrum) {
        return Err(Error::Disconnected {
            lambda2: vals.get(1).copied().unwrap_or(0.0),
        });
    }
    ridl_bounds_from_values(&vals[1..], vals.len(), cfg)
}

/// [`ridl_bounds`] for explicit non-zero Laplacian eigenvalues of an
/// `n`-node graph.
pub fn ridl_bounds_from_values(nonzero: &[f64], n: usize, cfg: &RidlConfig) -> Result<Bounds> {
    let (p, eps, s2) = (cfg.p, cfg.epsilon, cfg.sigma2);
    let epp = eps * p * p;
    let pref = s2 / (epp * n as f64);
    let mut lower = 0.0;
    let mut upper = 0.0;
    for &l in nonzero {
        let dl = 2.0 * l - epp * l * l;
        let du = 2.0 * (1.0 + eps * p - eps) * l - eps * p * l * l;
        for value in [dl, du] {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::NonpositiveDenominator { eigenvalue: l, value });
            }
        }
        lower += 1.0 / dl;
        upper += 1.0 / du;
    }
    Ok(Bounds {
        lower: pref * lower,
        upper: pref * upper,
    })
}

/// Effective-resistance envelope in both of its equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResistanceBounds {
    /// `σ²/(2p²) R_ave/ε`.
    pub lower: f64,
    /// `σ²/(2p³(1-k)) R_ave/ε`.
    pub upper: f64,
    /// `σ²/(2p²k) d_max R_ave`.
    pub lower_dmax_form: f64,
    /// `σ²/(2p³k(1-k)) d_max R_ave`.
    pub upper_dmax_form: f64,
}

pub fn resistance_bounds(r_ave: f64, cfg: &RidlConfig, d_max: usize) -> Result<ResistanceBounds> {
    if !(r_ave > 0.0 && r_ave.is_finite()) {
        return Err(invalid("r_ave", format!("must be positive, got {r_ave}")));
    }
    let k = cfg.epsilon * d_max as f64;
    if !(k > 0.0 && k < 1.0) {
        return Err(invalid("k", format!("eps * d_max = {k} must lie in (0, 1)")));
    }
    let (p, s2, eps) = (cfg.p, cfg.sigma2, cfg.epsilon);
    let dm = d_max as f64;
    Ok(ResistanceBounds {
        lower: s2 / (2.0 * p * p) * r_ave / eps,
        upper: s2 / (2.0 * p.powi(3) * (1.0 - k)) * r_ave / eps,
        lower_dmax_form: s2 / (2.0 * p * p * k) * dm * r_ave,
        upper_dmax_form: s2 / (2.0 * p.powi(3) * k * (1.0 - k)) * dm * r_ave,
    })
}

/// Closed-form bound evaluators for the families with explicit spectra.
pub mod family_bounds {
    use super::Bounds;
    use crate::ridl::RidlConfig;
    use std::f64::consts::PI;

    /// Star `S_n` (eigenvalues 1 with multiplicity `n-2` and `n`).
    pub fn star(n: usize, cfg: &RidlConfig) -> Bounds {
        let (p, e, s2) = (cfg.p, cfg.epsilon, cfg.sigma2);
        let nf = n as f64;
        let pref = s2 / (e * p * p * nf);
        Bounds {
            lower: pref * ((nf - 2.0) / (2.0 - e * p * p) + 1.0 / (nf * (2.0 - e * p * p * nf))),
            upper: pref
                * ((nf - 2.0) / (e * p + 2.0 - 2.0 * e)
                    + 1.0 / (nf * (2.0 * e * p + 2.0 - 2.0 * e - e * p * nf))),
        }
    }

    /// Path `P_n`, written in terms of `c_i = cos(π i / n)`.
    pub fn path(n: usize, cfg: &RidlConfig) -> Bounds {
        let (p, e, s2) = (cfg.p, cfg.epsilon, cfg.sigma2);
        let epp = e * p * p;
        let mut lower = 0.0;
        let mut upper = 0.0;
        for i in 1..n {
            let c = (PI * i as f64 / n as f64).cos();
            lower += 1.0 / (1.0 - epp - epp * c * c + (2.0 * epp - 1.0) * c);
            upper += 1.0 / (1.0 - e - e * p * c * c + (e * p + e - 1.0) * c);
        }
        let pref = s2 / (4.0 * epp * n as f64);
        Bounds {
            lower: pref * lower,
            upper: pref * upper,
        }
    }

    /// Complete graph `K_n` (eigenvalue `n` with multiplicity `n-1`).
    pub fn complete(n: usize, cfg: &RidlConfig) -> Bounds {
        let (p, e, s2) = (cfg.p, cfg.epsilon, cfg.sigma2);
        let nf = n as f64;
        Bounds {
            lower: s2 * (nf - 1.0) / (e * p * p * nf * nf * (2.0 - e * p * p * nf)),
            upper: s2 * (nf - 1.0) / (e * p * p * nf * nf * (2.0 + 2.0 * e * p - 2.0 * e - e * p * nf)),
        }
    }
}

/// Leading-order growth class of the noise index in `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    /// `Θ(N)`.
    Linear,
    /// `Θ(log N)`.
    Logarithmic,
    /// `Θ(1)`.
    Constant,
}

/// Predicted large-`N` behaviour for one family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Asymptotics {
    pub family: Family,
    pub n: usize,
    /// `eps * d_max` at this `n`.
    pub k: f64,
    pub growth: Growth,
    /// Predicted `J / N` for linearly growing families with a known slope.
    pub slope: Option<f64>,
    /// Limits of the lower and upper bounds for bounded families.
    pub lower_limit: Option<f64>,
    pub upper_limit: Option<f64>,
    /// `Θ(d_max R_ave)` envelope evaluated on the closed-form spectrum.
    pub resistance_envelope: Bounds,
}

/// Leading-order predictions for the families with explicit spectra.
/// `cfg.epsilon` is interpreted together with the family's `d_max` at `n`.
pub fn family_asymptotics(family: Family, n: usize, cfg: &RidlConfig) -> Result<Asymptotics> {
    let (spectrum, d_max, growth) = match family {
        Family::Star if n >= 3 => (closed_form::star(n), n - 1, Growth::Linear),
        Family::Path if n >= 3 => (closed_form::path(n), 2, Growth::Linear),
        Family::Complete if n >= 2 => (closed_form::complete(n), n - 1, Growth::Constant),
        Family::Grid2d | Family::Grid3d => {
            let axes = if family == Family::Grid2d { 2 } else { 3 };
            let side = (n as f64).powf(1.0 / axes as f64).round() as usize;
            if side < 3 || side.pow(axes as u32) != n {
                return Err(invalid("n", format!("{family} needs a perfect power with side >= 3, got {n}")));
            }
            let growth = if axes == 2 { Growth::Logarithmic } else { Growth::Constant };
            (closed_form::grid(&vec![side; axes]), 2 * axes, growth)
        }
        Family::ErdosRenyi => {
            return Err(invalid("family", "no closed-form asymptotics for Erdos-Renyi graphs"));
        }
        _ => return Err(invalid("n", format!("{n} is too small for {family}"))),
    };
    let k = cfg.epsilon * d_max as f64;
    if !(k > 0.0 && k < 1.0) {
        return Err(invalid("k", format!("eps * d_max = {k} must lie in (0, 1)")));
    }
    let (p, s2) = (cfg.p, cfg.sigma2);
    let r_ave = spectrum[1..].iter().map(|l| 1.0 / l).sum::<f64>() / n as f64;
    let env = resistance_bounds(r_ave, cfg, d_max)?;
    let (slope, lower_limit, upper_limit) = match family {
        Family::Star => (Some(s2 / (2.0 * k * p * p)), None, None),
        Family::Complete => (
            None,
            Some(s2 / (p * p * k * (2.0 - p * p * k))),
            Some(s2 / (p * p * k * (2.0 - p * k))),
        ),
        _ => (None, None, None),
    };
    Ok(Asymptotics {
        family,
        n,
        k,
        growth,
        slope,
        lower_limit,
        upper_limit,
        resistance_envelope: Bounds {
            lower: env.lower,
            upper: env.upper,
        },
    })
}

/// How each number in a [`NoiseReport`] was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodTags {
    pub exact: Option<&'static str>,
    pub bounds: &'static str,
    pub resistance: &'static str,
}

/// Everything known about one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseReport {
    pub n: usize,
    pub d_max: usize,
    pub p: f64,
    pub epsilon: f64,
    pub k: f64,
    pub sigma2: f64,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub r_ave: f64,
    pub j_exact: Option<f64>,
    pub j_lb: f64,
    pub j_ub: f64,
    pub j_res_lb: f64,
    pub j_res_ub: f64,
    pub methods: MethodTags,
}

impl NoiseReport {
    /// Relative errors `(exact - lb)/exact` and `(ub - exact)/exact`.
    pub fn relative_errors(&self) -> Option<(f64, f64)> {
        self.j_exact
            .map(|j| ((j - self.j_lb) / j, (self.j_ub - j) / j))
    }

    /// Checks `res_lb <= lb <= exact <= ub <= res_ub` with absolute slack.
    pub fn check_chain(&self, slack: f64) -> std::result::Result<(), String> {
        let mut chain = vec![("j_res_lb", self.j_res_lb), ("j_lb", self.j_lb)];
        if let Some(j) = self.j_exact {
            chain.push(("j_exact", j));
        }
        chain.push(("j_ub", self.j_ub));
        chain.push(("j_res_ub", self.j_res_ub));
        for w in chain.windows(2) {
            if w[0].1 > w[1].1 + slack {
                return Err(format!("{} = {} exceeds {} = {}", w[0].0, w[0].1, w[1].0, w[1].1));
            }
        }
        Ok(())
    }
}

/// Options for [`noise_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Compute the exact index only for `N <= exact_cap`.
    pub exact_cap: usize,
    pub exec: Exec,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            exact_cap: tol::EXACT_N_CAP,
            exec: Exec::default(),
        }
    }
}

/// Bounds for any size, plus the exact index when `N` is within the cap.
pub fn noise_report(g: &UndirectedGraph, cfg: &RidlConfig, opts: &ReportOptions) -> Result<NoiseReport> {
    check_consensus_conditions(g, cfg).into_result()?;
    let spectrum = laplacian_spectrum(g)?;
    let bounds = ridl_bounds(&spectrum, cfg)?;
    let r_ave = average_effective_resistance(g, &spectrum)?;
    let res = resistance_bounds(r_ave, cfg, g.d_max())?;
    let j_exact = if g.n() <= opts.exact_cap {
        let kopts = KOptions {
            n_cap: opts.exact_cap,
            exec: opts.exec,
            ..KOptions::default()
        };
        let ops = ExpectedOperators::from_moments(g, cfg, &kopts)?;
        Some(exact_noise_index_with(&ops, cfg.sigma2, opts.exec)?)
    } else {
        None
    };
    Ok(NoiseReport {
        n: g.n(),
        d_max: g.d_max(),
        p: cfg.p,
        epsilon: cfg.epsilon,
        k: cfg.k(g),
        sigma2: cfg.sigma2,
        lambda2: spectrum.lambda2(),
        lambda_n: spectrum.max(),
        r_ave,
        j_exact,
        j_lb: bounds.lower,
        j_ub: bounds.upper,
        j_res_lb: res.lower,
        j_res_ub: res.upper,
        methods: MethodTags {
            exact: j_exact.map(|_| "kronecker-moments"),
            bounds: "laplacian-spectrum",
            resistance: "average-effective-resistance",
        },
    })
}
