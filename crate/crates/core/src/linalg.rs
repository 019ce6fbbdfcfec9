//! Small dense helpers: LU solve with partial pivoting and Cholesky, used
//! for collocation systems, exact-solution constants and Schur complements.
//! The large systems go through the banded solvers in `solver`.

use crate::error::{Error, Result};

/// Solves a dense system in place; `a` is row-major n x n.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pivot_row, mut pivot_val) = (k, a[k][k].abs());
        for r in (k + 1)..n {
            if a[r][k].abs() > pivot_val {
                pivot_row = r;
                pivot_val = a[r][k].abs();
            }
        }
        if pivot_val == 0.0 {
            return Err(Error::RankDeficient(format!(
                "dense solve: zero pivot at column {k}"
            )));
        }
        a.swap(k, pivot_row);
        b.swap(k, pivot_row);
        perm.swap(k, pivot_row);
        let diag = a[k][k];
        for r in (k + 1)..n {
            let f = a[r][k] / diag;
            if f != 0.0 {
                for c in (k + 1)..n {
                    a[r][c] -= f * a[k][c];
                }
                b[r] -= f * b[k];
            }
            a[r][k] = 0.0;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in (k + 1)..n {
            s -= a[k][c] * b[c];
        }
        b[k] = s / a[k][k];
    }
    Ok(b)
}

/// Dense Cholesky (lower) in place; returns the number of the failing pivot
/// on indefiniteness.
pub(crate) struct DenseCholesky {
    n: usize,
    l: Vec<f64>, // row-major lower triangle, full n x n storage
}

impl DenseCholesky {
    /// Pivots are also checked relative to the matrix's own diagonal, so a
    /// row that is (numerically) dependent on earlier rows fails cleanly
    /// instead of producing a roundoff-sized pivot.
    pub fn new(a: &[f64], n: usize) -> Result<DenseCholesky> {
        let mut l = a.to_vec();
        let diag0: Vec<f64> = (0..n).map(|j| a[j * n + j].abs()).collect();
        for j in 0..n {
            for k in 0..j {
                let ljk = l[j * n + k];
                if ljk != 0.0 {
                    for i in j..n {
                        l[i * n + j] -= l[i * n + k] * ljk;
                    }
                }
            }
            let d = l[j * n + j];
            if d <= 1e-12 * diag0[j] {
                return Err(Error::NotPositiveDefinite { index: j, value: d });
            }
            let inv = 1.0 / d.sqrt();
            for i in j..n {
                l[i * n + j] *= inv;
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}
