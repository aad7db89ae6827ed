//! Randomly induced discretized Laplacians: every node is active with
//! probability `p` at each step, the active nodes induce a subgraph of the
//! underlying graph, and the update matrix is `P = I - eps * L(induced)`.
//!
//! Besides sampling, this module computes the expected operators `E[P]`,
//! `E[P^2]` and the second-moment operator `K = E[P Ω ⊗ P]` in closed form
//! from Bernoulli moments, and exposes a brute-force expectation over all
//! `2^N` activation patterns that serves as an independent check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::graphs::{is_connected, laplacian, UndirectedGraph};
use crate::linalg::{kron_accumulate, sym_norm_estimate, DenseMatrix};
use crate::tol;

/// Sampling and dynamics parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidlConfig {
    /// Per-node activation probability, in `(0, 1]`.
    pub p: f64,
    /// Step size; valid for a graph when `0 < eps < 1 / d_max`.
    pub epsilon: f64,
    /// Noise variance.
    pub sigma2: f64,
}

impl RidlConfig {
    pub fn new(p: f64, epsilon: f64, sigma2: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid("p", format!("activation probability must lie in (0, 1], got {p}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid("eps", format!("step size must be positive, got {epsilon}")));
        }
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(invalid("sigma2", format!("noise variance must be >= 0, got {sigma2}")));
        }
        Ok(Self { p, epsilon, sigma2 })
    }

    /// Config with `eps = k / d_max(g)`.
    pub fn from_k(g: &UndirectedGraph, p: f64, k: f64, sigma2: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(invalid("k", format!("normalized step must lie in (0, 1), got {k}")));
        }
        let d_max = g.d_max();
        if d_max == 0 {
            return Err(invalid("graph", "graph has no edges"));
        }
        Self::new(p, k / d_max as f64, sigma2)
    }

    /// Normalized step `k = eps * d_max(g)`.
    pub fn k(&self, g: &UndirectedGraph) -> f64 {
        self.epsilon * g.d_max() as f64
    }

    /// Rejects step sizes with `eps * d_max >= 1`.
    pub fn check_for(&self, g: &UndirectedGraph) -> Result<()> {
        let k = self.k(g);
        if k >= 1.0 {
            return Err(invalid(
                "eps",
                format!("eps * d_max = {k} must be < 1 (eps = {}, d_max = {})", self.epsilon, g.d_max()),
            ));
        }
        Ok(())
    }
}

/// Diagonal of the activation matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationPattern {
    pub gamma: Vec<bool>,
}

impl ActivationPattern {
    pub fn all_active(n: usize) -> Self {
        Self { gamma: vec![true; n] }
    }

    /// Pattern whose bit `i` is bit `i` of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self {
            gamma: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.gamma.iter().filter(|&&g| g).count()
    }
}

/// One sampled update matrix with the pattern that produced it.
#[derive(Debug, Clone)]
pub struct StochasticMatrixSample {
    pub matrix: DenseMatrix,
    pub pattern: ActivationPattern,
}

/// `n` independent Bernoulli(`p`) activations.
pub fn sample_activation<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> ActivationPattern {
    ActivationPattern {
        gamma: (0..n).map(|_| rng.random_bool(p)).collect(),
    }
}

/// Laplacian of the subgraph induced by the active nodes, embedded in
/// `n x n`.
pub fn induced_laplacian(g: &UndirectedGraph, pattern: &ActivationPattern) -> Result<DenseMatrix> {
    check_pattern(g, pattern)?;
    let mut l = DenseMatrix::zeros(g.n(), g.n());
    for &(i, j) in g.edges() {
        if pattern.gamma[i] && pattern.gamma[j] {
            l[(i, j)] = -1.0;
            l[(j, i)] = -1.0;
            l[(i, i)] += 1.0;
            l[(j, j)] += 1.0;
        }
    }
    Ok(l)
}

/// `I - eps * L(pattern)`.
pub fn ridl_matrix(g: &UndirectedGraph, epsilon: f64, pattern: &ActivationPattern) -> Result<DenseMatrix> {
    let l = induced_laplacian(g, pattern)?;
    DenseMatrix::identity(g.n()).add_scaled(&l, -epsilon)
}

/// Draws one RIDL update matrix.
pub fn sample_ridl<R: Rng + ?Sized>(
    g: &UndirectedGraph,
    cfg: &RidlConfig,
    rng: &mut R,
) -> Result<StochasticMatrixSample> {
    cfg.check_for(g)?;
    let pattern = sample_activation(g.n(), cfg.p, rng);
    let matrix = ridl_matrix(g, cfg.epsilon, &pattern)?;
    Ok(StochasticMatrixSample { matrix, pattern })
}

/// Writes `P(pattern) x` into `out` without forming `P`.
pub fn ridl_apply(g: &UndirectedGraph, epsilon: f64, pattern: &ActivationPattern, x: &[f64], out: &mut [f64]) {
    out.copy_from_slice(x);
    for &(i, j) in g.edges() {
        if pattern.gamma[i] && pattern.gamma[j] {
            let flow = epsilon * (x[i] - x[j]);
            out[i] -= flow;
            out[j] += flow;
        }
    }
}

fn check_pattern(g: &UndirectedGraph, pattern: &ActivationPattern) -> Result<()> {
    if pattern.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: pattern.len(),
        });
    }
    Ok(())
}

/// Outcome of checking the two almost-sure consensus conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusReport {
    /// `eps * d_max`.
    pub k: f64,
    /// Every diagonal entry of `P(t)` is at least `1 - k > 0`.
    pub positive_diagonal: bool,
    /// The graph of `E[P]` has a globally reachable node (here:
    /// the underlying graph is connected and `p > 0`).
    pub reachable: bool,
    pub failures: Vec<String>,
}

impl ConsensusReport {
    pub fn passed(&self) -> bool {
        self.positive_diagonal && self.reachable
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::ConsensusConditions(self.failures.join("; ")))
        }
    }
}

pub fn check_consensus_conditions(g: &UndirectedGraph, cfg: &RidlConfig) -> ConsensusReport {
    let k = cfg.k(g);
    let positive_diagonal = k < 1.0;
    let connected = is_connected(g);
    let reachable = connected && cfg.p > 0.0;
    let mut failures = Vec::new();
    if !positive_diagonal {
        failures.push(format!("eps * d_max = {k} is not below 1, diagonal of P(t) may vanish"));
    }
    if !connected {
        failures.push("underlying graph is disconnected".to_string());
    } else if cfg.p <= 0.0 {
        failures.push("activation probability is zero".to_string());
    }
    ConsensusReport {
        k,
        positive_diagonal,
        reachable,
        failures,
    }
}

/// `E[P] = I - eps p^2 L`.
pub fn expected_p(g: &UndirectedGraph, cfg: &RidlConfig) -> DenseMatrix {
    let l = laplacian(g).matrix;
    let c = cfg.epsilon * cfg.p * cfg.p;
    DenseMatrix::identity(g.n())
        .add_scaled(&l, -c)
        .expect("same shape")
}

/// `E[P^2] = I + 2 eps p^2 (eps - eps p - 1) L + eps^2 p^3 L^2`.
pub fn expected_p_squared(g: &UndirectedGraph, cfg: &RidlConfig) -> DenseMatrix {
    let (p, eps) = (cfg.p, cfg.epsilon);
    let l = laplacian(g).matrix;
    let l2 = l.matmul(&l).expect("square");
    DenseMatrix::identity(g.n())
        .add_scaled(&l, 2.0 * eps * p * p * (eps - eps * p - 1.0))
        .and_then(|m| m.add_scaled(&l2, eps * eps * p * p * p))
        .expect("same shape")
}

/// Where the projector `Ω = I - 11ᵀ/N` enters the second-moment operator.
/// All three forms yield the same noise index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KForm {
    /// `E[P Ω ⊗ P]`.
    #[default]
    OmegaFirst,
    /// `E[P Ω ⊗ P Ω]`.
    OmegaBoth,
    /// `E[P ⊗ P Ω]`.
    OmegaSecond,
}

/// Options for building `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KOptions {
    pub form: KForm,
    /// Largest `N` accepted.
    pub n_cap: usize,
    pub exec: Exec,
}

impl Default for KOptions {
    fn default() -> Self {
        Self {
            form: KForm::OmegaFirst,
            n_cap: tol::EXACT_N_CAP,
            exec: Exec::default(),
        }
    }
}

/// `Ω = I - (1/N) 11ᵀ`.
pub fn omega(n: usize) -> DenseMatrix {
    let c = 1.0 / n as f64;
    DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 - c } else { -c })
}

/// `K` from Bernoulli moments with default options.
pub fn k_operator_moments(g: &UndirectedGraph, cfg: &RidlConfig) -> Result<DenseMatrix> {
    k_operator_moments_with(g, cfg, &KOptions::default())
}

/// Exact `K` assembled from `E[P ⊗ P] = I - eps(I ⊗ E[L] + E[L] ⊗ I) + eps^2 E[L ⊗ L]`.
///
/// Each `L` entry is a sum of activation monomials `γ_a γ_b` (off-diagonal:
/// `-A_ij γ_i γ_j`, diagonal: `sum_m A_im γ_i γ_m`), and the expectation of a
/// product of monomials is `p^(number of distinct indices)`.
pub fn k_operator_moments_with(g: &UndirectedGraph, cfg: &RidlConfig, opts: &KOptions) -> Result<DenseMatrix> {
    let n = g.n();
    if n > opts.n_cap {
        return Err(Error::TooLarge {
            what: "the exact second-moment operator",
            n,
            cap: opts.n_cap,
        });
    }
    cfg.check_for(g)?;
    let mut epp = expected_kron_pp(g, cfg, opts.exec);
    project_omega(&mut epp, n, opts.form, opts.exec);
    Ok(epp)
}

/// Monomials `coef * γ_a γ_b` making up one entry of `L(t)`.
type Monomials = Vec<(f64, usize, usize)>;

fn laplacian_monomials(g: &UndirectedGraph) -> Vec<(usize, usize, Monomials)> {
    let mut support = Vec::with_capacity(g.n() + 2 * g.edge_count());
    for i in 0..g.n() {
        let diag: Monomials = g.neighbors(i).iter().map(|&m| (1.0, i, m)).collect();
        if !diag.is_empty() {
            support.push((i, i, diag));
        }
        for &j in g.neighbors(i) {
            support.push((i, j, vec![(-1.0, i, j)]));
        }
    }
    support
}

fn expected_kron_pp(g: &UndirectedGraph, cfg: &RidlConfig, exec: Exec) -> DenseMatrix {
    let n = g.n();
    let nn = n * n;
    let (p, eps) = (cfg.p, cfg.epsilon);
    let powers = [1.0, p, p * p, p * p * p, p * p * p * p];
    let support = laplacian_monomials(g);
    // Row (i, k) of E[L ⊗ L] only involves support entries in rows i and k.
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, (i, _, _)) in support.iter().enumerate() {
        by_row[*i].push(idx);
    }
    let lbar = laplacian(g).matrix;
    let mean_l = lbar.scale(p * p);

    let mut out = DenseMatrix::zeros(nn, nn);
    exec.for_each_chunk_mut(out.as_mut_slice(), nn, |r, row| {
        let (i, k) = (r / n, r % n);
        row[r] = 1.0;
        // -eps (I ⊗ E[L] + E[L] ⊗ I)
        for l in 0..n {
            let v = mean_l[(k, l)];
            if v != 0.0 {
                row[i * n + l] -= eps * v;
            }
        }
        for j in 0..n {
            let v = mean_l[(i, j)];
            if v != 0.0 {
                row[j * n + k] -= eps * v;
            }
        }
        // eps^2 E[L_ij L_kl]
        for &s1 in &by_row[i] {
            let (_, j, ref t1) = support[s1];
            for &s2 in &by_row[k] {
                let (_, l, ref t2) = support[s2];
                let mut acc = 0.0;
                for &(c1, a1, b1) in t1 {
                    for &(c2, a2, b2) in t2 {
                        let shared = (a1 == a2 || a1 == b2) as usize + (b1 == a2 || b1 == b2) as usize;
                        acc += c1 * c2 * powers[4 - shared];
                    }
                }
                row[j * n + l] += eps * eps * acc;
            }
        }
    });
    out
}

/// Right-multiplies the lifted matrix by `Ω ⊗ I`, `Ω ⊗ Ω` or `I ⊗ Ω`.
fn project_omega(m: &mut DenseMatrix, n: usize, form: KForm, exec: Exec) {
    let nn = n * n;
    let inv = 1.0 / n as f64;
    let (first, second) = match form {
        KForm::OmegaFirst => (true, false),
        KForm::OmegaBoth => (true, true),
        KForm::OmegaSecond => (false, true),
    };
    exec.for_each_chunk_mut(m.as_mut_slice(), nn, |_, row| {
        if first {
            // column index j*n + l; centre over j for each l
            for l in 0..n {
                let mean = (0..n).map(|j| row[j * n + l]).sum::<f64>() * inv;
                for j in 0..n {
                    row[j * n + l] -= mean;
                }
            }
        }
        if second {
            for j in 0..n {
                let block = &mut row[j * n..(j + 1) * n];
                let mean = block.iter().sum::<f64>() * inv;
                block.iter_mut().for_each(|x| *x -= mean);
            }
        }
    });
}

/// Probability of an activation pattern with `active` of `n` nodes on.
pub fn pattern_weight(n: usize, active: usize, p: f64) -> f64 {
    p.powi(active as i32) * (1.0 - p).powi((n - active) as i32)
}

/// `sum over all 2^N patterns of weight(pattern) * f(pattern, P(pattern))`.
///
/// Patterns are split into a fixed number of contiguous blocks, summed in
/// mask order within each block, and the block sums are added in block
/// order, so the result does not depend on the execution policy.
pub fn expectation_over_patterns<F>(
    g: &UndirectedGraph,
    cfg: &RidlConfig,
    exec: Exec,
    f: F,
) -> Result<DenseMatrix>
where
    F: Fn(&ActivationPattern, &DenseMatrix) -> DenseMatrix + Sync + Send,
{
    let n = g.n();
    if n > tol::ENUMERATION_N_CAP {
        return Err(Error::TooLarge {
            what: "pattern enumeration",
            n,
            cap: tol::ENUMERATION_N_CAP,
        });
    }
    let total: u64 = 1 << n;
    let blocks = total.min(64);
    let per_block = total / blocks;
    let partials = exec.map_indexed(blocks as usize, |b| -> Result<Option<DenseMatrix>> {
        let mut acc: Option<DenseMatrix> = None;
        for mask in (b as u64 * per_block)..((b as u64 + 1) * per_block) {
            let pattern = ActivationPattern::from_mask(n, mask);
            let w = pattern_weight(n, pattern.active_count(), cfg.p);
            if w == 0.0 {
                continue;
            }
            let pm = ridl_matrix(g, cfg.epsilon, &pattern)?;
            let term = f(&pattern, &pm);
            acc = Some(match acc {
                None => term.scale(w),
                Some(a) => a.add_scaled(&term, w)?,
            });
        }
        Ok(acc)
    });
    let mut sum: Option<DenseMatrix> = None;
    for part in partials {
        if let Some(m) = part? {
            sum = Some(match sum {
                None => m,
                Some(s) => s.add_scaled(&m, 1.0)?,
            });
        }
    }
    sum.ok_or_else(|| invalid("p", "all activation patterns have zero weight"))
}

/// `K = E[P Ω ⊗ P]` by summing over every activation pattern.
pub fn k_operator_enumeration(g: &UndirectedGraph, cfg: &RidlConfig) -> Result<DenseMatrix> {
    k_operator_enumeration_with(g, cfg, KForm::OmegaFirst, Exec::default())
}

pub fn k_operator_enumeration_with(
    g: &UndirectedGraph,
    cfg: &RidlConfig,
    form: KForm,
    exec: Exec,
) -> Result<DenseMatrix> {
    cfg.check_for(g)?;
    let n = g.n();
    let om = omega(n);
    expectation_over_patterns(g, cfg, exec, |_, pm| {
        let pw = pm.matmul(&om).expect("square");
        let (a, b) = match form {
            KForm::OmegaFirst => (&pw, pm),
            KForm::OmegaBoth => (&pw, &pw),
            KForm::OmegaSecond => (pm, &pw),
        };
        let mut out = DenseMatrix::zeros(n * n, n * n);
        kron_accumulate(&mut out, a, b, 1.0);
        out
    })
}

/// Expected update matrix, expected squared matrix and `K` together.
#[derive(Debug, Clone)]
pub struct ExpectedOperators {
    pub p_bar: DenseMatrix,
    pub p_bbar: DenseMatrix,
    pub k_op: DenseMatrix,
    pub omega: DenseMatrix,
}

impl ExpectedOperators {
    pub fn from_moments(g: &UndirectedGraph, cfg: &RidlConfig, opts: &KOptions) -> Result<Self> {
        Ok(Self {
            p_bar: expected_p(g, cfg),
            p_bbar: expected_p_squared(g, cfg),
            k_op: k_operator_moments_with(g, cfg, opts)?,
            omega: omega(g.n()),
        })
    }

    pub fn from_enumeration(g: &UndirectedGraph, cfg: &RidlConfig, form: KForm, exec: Exec) -> Result<Self> {
        Ok(Self {
            p_bar: expected_p(g, cfg),
            p_bbar: expected_p_squared(g, cfg),
            k_op: k_operator_enumeration_with(g, cfg, form, exec)?,
            omega: omega(g.n()),
        })
    }

    pub fn n(&self) -> usize {
        self.p_bar.rows()
    }

    /// Power-iteration estimate of `||K||_2` (a lower bound on it).
    pub fn k_norm_estimate(&self) -> f64 {
        sym_norm_estimate(&self.k_op, 500)
    }
}
