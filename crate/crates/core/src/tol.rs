//! Numerical tolerances shared by the library, its tests and the CLI.

/// Relative symmetry tolerance accepted by the symmetric eigensolver.
pub const SYMMETRY_REL: f64 = 1e-12;

/// Eigenvalues below `CONNECTIVITY_REL * lambda_max` count as zero when
/// deciding connectivity from a Laplacian spectrum.
pub const CONNECTIVITY_REL: f64 = 1e-9;

/// Cut-off (relative to the largest eigenvalue) used by the PSD pseudoinverse.
pub const PINV_REL: f64 = 1e-9;

/// Maximum tolerated `||A v - lambda v|| / ||A||` for eigenpairs.
pub const EIGEN_RESIDUAL: f64 = 1e-8;

/// Largest condition estimate accepted by the dense solver.
pub const MAX_CONDITION: f64 = 1e12;

/// The second largest eigenvalue of an averaging matrix must lie below
/// `1 - PERRON_GAP` for the consensus direction to be isolated.
pub const PERRON_GAP: f64 = 1e-9;

/// Row-sum tolerance for sampled stochastic matrices.
pub const ROW_SUM: f64 = 1e-12;

/// Default cap on the dimension of a Kronecker product.
pub const KRON_DIM_CAP: usize = 16_384;

/// Default cap on `N` for the exact (N^2-dimensional) noise index.
pub const EXACT_N_CAP: usize = 64;

/// Largest `N` for which the 2^N enumeration oracle is allowed.
pub const ENUMERATION_N_CAP: usize = 14;

/// Default number of Erdos-Renyi resamples before giving up on connectivity.
pub const ER_MAX_ATTEMPTS: usize = 1000;

/// Slack used when checking the bound chain on emitted results.
pub const SANDWICH_SLACK: f64 = 1e-9;
