//! Dense linear algebra substrate: matrices, the symmetric eigensolver,
//! Kronecker products, LU solves and the PSD pseudoinverse.

mod eigen;
mod kron;
mod matrix;
mod pinv;
mod solve;

pub use eigen::{eigen_residual, sym_eigen, SpectralData};
pub(crate) use kron::kron_accumulate;
pub use kron::{kron, kron_capped};
pub use matrix::DenseMatrix;
pub use pinv::pseudoinverse_psd;
pub use solve::{solve, solve_with};

/// Euclidean norm of a vector.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Estimates the spectral norm of a symmetric matrix by power iteration
/// from a fixed start vector. The estimate never exceeds the true norm.
pub fn sym_norm_estimate(a: &DenseMatrix, iterations: usize) -> f64 {
    let n = a.rows();
    if n == 0 {
        return 0.0;
    }
    // Deterministic, non-degenerate start.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_75).fract()).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let y = a.matvec(&x).expect("square matrix");
        let ny = norm2(&y);
        if ny == 0.0 {
            return 0.0;
        }
        estimate = ny;
        x = y.into_iter().map(|v| v / ny).collect();
    }
    estimate
}
