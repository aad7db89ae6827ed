use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::tol;

/// Kronecker product `a ⊗ b` with the default dimension cap.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    kron_capped(a, b, tol::KRON_DIM_CAP)
}

/// Kronecker product; rejects results with more than `cap` rows or columns.
pub fn kron_capped(a: &DenseMatrix, b: &DenseMatrix, cap: usize) -> Result<DenseMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => (r, c),
        (r, c) => {
            return Err(Error::KronTooLarge {
                dim: r.unwrap_or(usize::MAX).max(c.unwrap_or(usize::MAX)),
                cap,
            })
        }
    };
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut out = DenseMatrix::zeros(rows, cols);
    kron_accumulate(&mut out, a, b, 1.0);
    Ok(out)
}

/// `out += weight * (a ⊗ b)`; `out` must already have the product shape.
pub(crate) fn kron_accumulate(out: &mut DenseMatrix, a: &DenseMatrix, b: &DenseMatrix, weight: f64) {
    let (br, bc) = (b.rows(), b.cols());
    debug_assert_eq!(out.rows(), a.rows() * br);
    debug_assert_eq!(out.cols(), a.cols() * bc);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = weight * a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            for k in 0..br {
                let dst = &mut out.row_mut(i * br + k)[j * bc..(j + 1) * bc];
                for (d, &s) in dst.iter_mut().zip(b.row(k)) {
                    *d += aij * s;
                }
            }
        }
    }
}
