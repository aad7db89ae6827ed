//! Underlying graphs: generators for the standard families, Laplacians,
//! connectivity, closed-form spectra and effective resistance.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{pseudoinverse_psd, DenseMatrix, SpectralData};
use crate::tol;

/// Simple undirected graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    /// Sorted pairs `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates
    /// and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", format!("graph needs at least 2 nodes, got {n}")));
        }
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(invalid("edges", format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(invalid("edges", format!("self-loop at node {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid("edges", format!("duplicate edge {:?}", w[0])));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &list {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        Ok(Self {
            n,
            edges: list,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn d_max(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// 0/1 adjacency matrix.
    pub fn adjacency(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Serializes to the edge-list text format: `n m` then one `i j` per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for &(i, j) in &self.edges {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }

    /// Parses the edge-list text format. Blank lines and `#` comments are
    /// ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "missing header `n m`".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            edges.push(parse_pair(line, l)?);
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: hline,
                reason: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(n, edges)
    }
}

fn parse_pair(line: usize, s: &str) -> Result<(usize, usize)> {
    let mut it = s.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse {
                line,
                reason: "expected two integers".into(),
            })?
            .parse::<usize>()
            .map_err(|e| Error::Parse {
                line,
                reason: e.to_string(),
            })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            reason: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// Graph families with closed-form spectra, plus Erdos-Renyi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Star,
    Path,
    Grid2d,
    Grid3d,
    Complete,
    ErdosRenyi,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Star,
        Family::Path,
        Family::Grid2d,
        Family::Grid3d,
        Family::Complete,
        Family::ErdosRenyi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Star => "star",
            Family::Path => "path",
            Family::Grid2d => "grid2d",
            Family::Grid3d => "grid3d",
            Family::Complete => "complete",
            Family::ErdosRenyi => "erdos-renyi",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid("graph", format!("unknown family `{s}`")))
    }
}

/// Star `S_n`: hub 0 joined to every other node.
pub fn make_star(n: usize) -> Result<UndirectedGraph> {
    if n < 3 {
        return Err(invalid("n", format!("star needs n >= 3, got {n}")));
    }
    UndirectedGraph::from_edges(n, (1..n).map(|j| (0, j)))
}

/// Path `P_n`.
pub fn make_path(n: usize) -> Result<UndirectedGraph> {
    if n < 2 {
        return Err(invalid("n", format!("path needs n >= 2, got {n}")));
    }
    UndirectedGraph::from_edges(n, (0..n - 1).map(|i| (i, i + 1)))
}

/// Cartesian grid with the given side lengths (1 to 3 axes, each >= 2).
/// Node ids are row-major, last axis fastest.
pub fn make_grid(dims: &[usize]) -> Result<UndirectedGraph> {
    if dims.is_empty() || dims.len() > 3 {
        return Err(invalid("dims", format!("grid needs 1 to 3 axes, got {}", dims.len())));
    }
    if let Some(&s) = dims.iter().find(|&&s| s < 2) {
        return Err(invalid("dims", format!("grid side must be >= 2, got {s}")));
    }
    let n: usize = dims.iter().product();
    let mut strides = vec![1; dims.len()];
    for a in (0..dims.len() - 1).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }
    let mut edges = Vec::new();
    for node in 0..n {
        for (&side, &stride) in dims.iter().zip(&strides) {
            if (node / stride) % side + 1 < side {
                edges.push((node, node + stride));
            }
        }
    }
    UndirectedGraph::from_edges(n, edges)
}

/// Complete graph `K_n`.
pub fn make_complete(n: usize) -> Result<UndirectedGraph> {
    if n < 2 {
        return Err(invalid("n", format!("complete graph needs n >= 2, got {n}")));
    }
    UndirectedGraph::from_edges(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))))
}

/// Result of an Erdos-Renyi draw.
#[derive(Debug, Clone)]
pub struct ErdosRenyiSample {
    pub graph: UndirectedGraph,
    /// Number of draws made (1 when the first draw was accepted).
    pub attempts: usize,
    pub seed: u64,
}

/// `G(n, p_er)` from a ChaCha8 stream seeded with `seed`. With
/// `require_connected`, disconnected draws are discarded and redrawn from
/// the same stream, up to `max_attempts` draws.
pub fn make_erdos_renyi(
    n: usize,
    p_er: f64,
    seed: u64,
    require_connected: bool,
    max_attempts: usize,
) -> Result<ErdosRenyiSample> {
    if n < 2 {
        return Err(invalid("n", format!("Erdos-Renyi graph needs n >= 2, got {n}")));
    }
    if !(p_er > 0.0 && p_er <= 1.0) {
        return Err(invalid("p_er", format!("must lie in (0, 1], got {p_er}")));
    }
    if max_attempts == 0 {
        return Err(invalid("max_attempts", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_attempts {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(p_er) {
                    edges.push((i, j));
                }
            }
        }
        let graph = UndirectedGraph::from_edges(n, edges)?;
        if !require_connected || is_connected(&graph) {
            return Ok(ErdosRenyiSample {
                graph,
                attempts: attempt,
                seed,
            });
        }
    }
    Err(Error::ConnectivityNotReached {
        n,
        p_er,
        attempts: max_attempts,
    })
}

/// Graph Laplacian `D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianView {
    pub matrix: DenseMatrix,
}

pub fn laplacian(g: &UndirectedGraph) -> LaplacianView {
    let mut l = DenseMatrix::zeros(g.n(), g.n());
    for i in 0..g.n() {
        l[(i, i)] = g.degree(i) as f64;
    }
    for &(i, j) in g.edges() {
        l[(i, j)] = -1.0;
        l[(j, i)] = -1.0;
    }
    LaplacianView { matrix: l }
}

/// Ascending Laplacian spectrum from the dense eigensolver.
pub fn laplacian_spectrum(g: &UndirectedGraph) -> Result<SpectralData> {
    crate::linalg::sym_eigen(&laplacian(g).matrix)
}

/// Breadth-first reachability from node 0.
pub fn is_connected(g: &UndirectedGraph) -> bool {
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == g.n()
}

/// Spectral connectivity test: `lambda_2 > 1e-9 * lambda_N`.
pub fn spectrum_is_connected(spectrum: &SpectralData) -> bool {
    spectrum.len() >= 2 && spectrum.lambda2() > tol::CONNECTIVITY_REL * spectrum.max().max(1.0)
}

/// `R_ave = (1/N) * sum_{i >= 2} 1 / lambda_i(L)`.
pub fn average_effective_resistance(g: &UndirectedGraph, spectrum: &SpectralData) -> Result<f64> {
    if spectrum.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: spectrum.len(),
        });
    }
    if !spectrum_is_connected(spectrum) {
        return Err(Error::Disconnected {
            lambda2: spectrum.lambda2(),
        });
    }
    let sum: f64 = spectrum.eigenvalues[1..].iter().map(|l| 1.0 / l).sum();
    Ok(sum / g.n() as f64)
}

/// Average effective resistance from pairwise resistances
/// `R_ij = L+_ii + L+_jj - 2 L+_ij`, averaged as `(1/(2N^2)) sum_ij R_ij`.
pub fn average_effective_resistance_pairwise(g: &UndirectedGraph) -> Result<f64> {
    if !is_connected(g) {
        return Err(Error::Disconnected { lambda2: 0.0 });
    }
    let lp = pseudoinverse_psd(&laplacian(g).matrix)?;
    let n = g.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += lp[(i, i)] + lp[(j, j)] - 2.0 * lp[(i, j)];
        }
    }
    Ok(total / (2.0 * (n * n) as f64))
}

/// Closed-form Laplacian spectra, ascending.
pub mod closed_form {
    use std::f64::consts::PI;

    /// `{0, 1 (n-2 times), n}`.
    pub fn star(n: usize) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(std::iter::repeat_n(1.0, n - 2));
        v.push(n as f64);
        v
    }

    /// `2 - 2 cos(pi h / n)`, `h = 0..n`.
    pub fn path(n: usize) -> Vec<f64> {
        (0..n).map(|h| 2.0 - 2.0 * (PI * h as f64 / n as f64).cos()).collect()
    }

    /// All sums `2k - 2 sum_a cos(pi h_a / n_a)`, sorted ascending.
    pub fn grid(dims: &[usize]) -> Vec<f64> {
        let mut values = vec![0.0];
        for &side in dims {
            let axis = path(side);
            values = values
                .iter()
                .flat_map(|&v| axis.iter().map(move |&a| v + a))
                .collect();
        }
        values.sort_by(f64::total_cmp);
        values
    }

    /// `{0, n (n-1 times)}`.
    pub fn complete(n: usize) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(std::iter::repeat_n(n as f64, n - 1));
        v
    }
}
