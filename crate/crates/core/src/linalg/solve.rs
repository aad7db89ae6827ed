use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::tol;

/// Rows per work item in the parallel elimination sweep.
const ROWS_PER_TASK: usize = 32;

/// Solves `a x = rhs` by LU factorization with partial pivoting.
pub fn solve(a: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    solve_with(a, rhs, Exec::default())
}

/// [`solve`] with an explicit execution policy for the elimination sweep.
pub fn solve_with(a: &DenseMatrix, rhs: &[f64], exec: Exec) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: a.cols(),
        });
    }
    let n = a.rows();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    if !a.is_finite() || rhs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }

    let mut lu = a.clone();
    let mut b = rhs.to_vec();
    let scale = a.max_abs();
    let mut max_pivot = 0.0_f64;
    let mut min_pivot = f64::INFINITY;

    for k in 0..n {
        let (piv_row, piv_abs) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= f64::EPSILON * scale * n as f64 || piv_abs == 0.0 {
            return Err(Error::Singular {
                column: k,
                pivot: piv_abs,
                condition: f64::INFINITY,
            });
        }
        if piv_row != k {
            swap_rows(&mut lu, k, piv_row);
            b.swap(k, piv_row);
        }
        max_pivot = max_pivot.max(piv_abs);
        min_pivot = min_pivot.min(piv_abs);

        let pivot = lu[(k, k)];
        let (head, tail) = lu.as_mut_slice().split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..(k + 1) * n];
        exec.for_each_chunk_mut(tail, ROWS_PER_TASK * n, |_, rows| {
            for row in rows.chunks_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for (x, &p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *x -= factor * p;
                    }
                }
            }
        });
        let bk = b[k];
        for i in (k + 1)..n {
            b[i] -= lu[(i, k)] * bk;
        }
    }

    let condition = max_pivot / min_pivot;
    if condition > tol::MAX_CONDITION {
        return Err(Error::Singular {
            column: n - 1,
            pivot: min_pivot,
            condition,
        });
    }

    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| lu[(k, j)] * b[j]).sum();
        b[k] = (b[k] - s) / lu[(k, k)];
    }
    Ok(b)
}

fn swap_rows(m: &mut DenseMatrix, i: usize, j: usize) {
    let n = m.cols();
    let (lo, hi) = (i.min(j), i.max(j));
    let (a, b) = m.as_mut_slice().split_at_mut(hi * n);
    a[lo * n..(lo + 1) * n].swap_with_slice(&mut b[..n]);
}
