use super::{sym_eigen, DenseMatrix};
use crate::error::Result;
use crate::tol;

/// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix,
/// via its spectral decomposition. Eigenvalues below `1e-9 * lambda_max`
/// are treated as zero.
pub fn pseudoinverse_psd(a: &DenseMatrix) -> Result<DenseMatrix> {
    let spec = sym_eigen(a)?;
    let n = a.rows();
    let lambda_max = spec.eigenvalues.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let cutoff = tol::PINV_REL * lambda_max;
    let v = spec.eigenvectors.expect("sym_eigen returns eigenvectors");
    let mut out = DenseMatrix::zeros(n, n);
    for (k, &lambda) in spec.eigenvalues.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let inv = 1.0 / lambda;
        for i in 0..n {
            let vi = v[(i, k)] * inv;
            if vi == 0.0 {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += vi * v[(j, k)];
            }
        }
    }
    Ok(out)
}
