//! Sparse direct solvers for the three stages.
//!
//! Stages 1 and 3 are symmetric positive definite and use a band Cholesky
//! factorization (the lexicographic tensor-product dof order keeps the band
//! tight, which is the fill-control needed for the finest levels).
//!
//! Stage 2 is a symmetric indefinite saddle-point system
//! [[A, B^T], [B, 0]] with A positive semidefinite and a small constraint
//! block B. It is solved through the shifted system [[A + eps I, B^T],
//! [B, 0]], factored exactly as band Cholesky of the (1,1) block plus dense
//! Cholesky of the Schur complement B (A + eps I)^-1 B^T, followed by
//! iterative refinement against the unshifted system. On success the
//! factorization's inertia is (n positive, m negative) pivots by
//! construction; a failing Schur pivot identifies a dependent constraint
//! row.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DenseCholesky;
use crate::sparse::CsrMatrix;

/// Symmetric band matrix, lower storage: `data[j*(bw+1) + (i-j)] = A[i][j]`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    /// Packs the lower triangle of a symmetric CSR matrix, adding `shift`
    /// to the diagonal.
    pub fn from_csr(a: &CsrMatrix, shift: f64) -> BandMatrix {
        assert_eq!(a.nrows, a.ncols);
        let n = a.nrows;
        let mut bw = 0usize;
        for i in 0..n {
            let (cols, _) = a.row(i);
            for &c in cols {
                let c = c as usize;
                if c <= i {
                    bw = bw.max(i - c);
                }
            }
        }
        let mut data = vec![0.0; n * (bw + 1)];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let c = c as usize;
                if c <= i {
                    data[c * (bw + 1) + (i - c)] = v;
                }
            }
        }
        for j in 0..n {
            data[j * (bw + 1)] += shift;
        }
        BandMatrix { n, bw, data }
    }

    /// In-place band Cholesky; fails on a non-positive pivot.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for j in 0..n {
            let k_lo = j.saturating_sub(bw);
            for k in k_lo..j {
                let ljk = self.data[k * w + (j - k)];
                if ljk == 0.0 {
                    continue;
                }
                let i_hi = (k + bw).min(n - 1);
                let (dst, src) = {
                    // Columns j and k do not alias: split at j*w.
                    let (left, right) = self.data.split_at_mut(j * w);
                    (&mut right[..(i_hi - j + 1)], &left[k * w..])
                };
                for i in j..=i_hi {
                    dst[i - j] -= src[i - k] * ljk;
                }
            }
            let d = self.data[j * w];
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { index: j, value: d });
            }
            let inv = 1.0 / d.sqrt();
            let i_hi = (j + bw).min(n - 1);
            for i in j..=i_hi {
                self.data[j * w + (i - j)] *= inv;
            }
        }
        Ok(BandCholesky {
            n,
            bw,
            data: self.data,
        })
    }
}

/// Lower band Cholesky factor; immutable, reusable for many solves.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    /// Solves L L^T x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // Forward substitution, column oriented; leading zeros of b keep
        // leading zeros of x, so skip ahead to the first nonzero.
        let start = b.iter().position(|&v| v != 0.0).unwrap_or(n);
        for j in start..n {
            let xj = b[j] / self.data[j * w];
            b[j] = xj;
            if xj != 0.0 {
                let i_hi = (j + bw).min(n - 1);
                let col = &self.data[j * w..];
                for i in (j + 1)..=i_hi {
                    b[i] -= col[i - j] * xj;
                }
            }
        }
        // Backward substitution with L^T.
        for j in (0..n).rev() {
            let i_hi = (j + bw).min(n - 1);
            let col = &self.data[j * w..];
            let mut s = b[j];
            for i in (j + 1)..=i_hi {
                s -= col[i - j] * b[i];
            }
            b[j] = s / col[0];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Factorization of a symmetric positive definite system; keeps the original
/// matrix for residual checks.
pub struct SpdFactorization {
    matrix: CsrMatrix,
    chol: BandCholesky,
}

impl SpdFactorization {
    pub fn new(a: &CsrMatrix) -> Result<SpdFactorization> {
        let chol = BandMatrix::from_csr(a, 0.0).cholesky()?;
        Ok(SpdFactorization {
            matrix: a.clone(),
            chol,
        })
    }

    /// Solve with a relative-residual guarantee of 1e-10 (one refinement
    /// step is plenty for these well-scaled systems).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = self.chol.solve(b);
        let mut r = residual(&self.matrix, &x, b);
        if norm(&r) > 1e-13 * bnorm {
            self.chol.solve_in_place(&mut r);
            for (xi, ri) in x.iter_mut().zip(&r) {
                *xi += ri;
            }
        }
        let res = norm(&residual(&self.matrix, &x, b)) / bnorm;
        if res > 1e-10 {
            return Err(Error::Residual {
                achieved: res,
                required: 1e-10,
            });
        }
        Ok(x)
    }
}

/// Direct SPD solve: band Cholesky plus residual check.
pub fn solve_spd(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SpdFactorization::new(a)?.solve(b)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut ax = vec![0.0; b.len()];
    a.matvec(x, &mut ax);
    ax.iter().zip(b).map(|(axi, bi)| bi - axi).collect()
}

/// The stage-2 block system [[A, B^T], [B, 0]] [x; y] = [f; g].
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: CsrMatrix,
    /// Constraint rows (multiplier pairings stacked with the orthogonality
    /// rows fixing the symCurl kernel).
    pub b: CsrMatrix,
    pub rhs_primal: Vec<f64>,
    pub rhs_constraint: Vec<f64>,
}

/// Solution with solver diagnostics.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub primal: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub relative_residual: f64,
    pub refinements: usize,
    /// (positive, negative) pivot counts of the factorization.
    pub inertia: (usize, usize),
}

/// Bordered factorization of the regularized saddle system; immutable and
/// usable for repeated solves. The dof order is the natural block order
/// (primal then constraints), no permutation is applied.
pub struct SaddleFactorization {
    a: CsrMatrix,
    b: CsrMatrix,
    chol: BandCholesky,
    schur: DenseCholesky,
    eps: f64,
    n: usize,
    m: usize,
}

impl SaddleFactorization {
    pub fn new(a: &CsrMatrix, b: &CsrMatrix) -> Result<SaddleFactorization> {
        assert_eq!(a.nrows, a.ncols);
        assert_eq!(b.ncols, a.ncols);
        let n = a.nrows;
        let m = b.nrows;
        let eps = 1e-9 * a.max_diag().max(1.0);
        let chol = BandMatrix::from_csr(a, eps).cholesky().map_err(|e| match e {
            Error::NotPositiveDefinite { index, value } => Error::NotPositiveDefinite {
                index,
                value,
            },
            other => other,
        })?;

        // Schur complement S = B (A+eps)^-1 B^T, SPD iff B has full row rank.
        let cols: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|r| {
                let mut br = vec![0.0; n];
                let (cs, vs) = b.row(r);
                for (&c, &v) in cs.iter().zip(vs) {
                    br[c as usize] = v;
                }
                chol.solve_in_place(&mut br);
                br
            })
            .collect();
        let mut s = vec![0.0; m * m];
        for r in 0..m {
            let (cs, vs) = b.row(r);
            for r2 in 0..m {
                let col = &cols[r2];
                let mut acc = 0.0;
                for (&c, &v) in cs.iter().zip(vs) {
                    acc += v * col[c as usize];
                }
                s[r * m + r2] = acc;
            }
        }
        let schur = DenseCholesky::new(&s, m).map_err(|e| match e {
            Error::NotPositiveDefinite { index, .. } => Error::RankDeficient(format!(
                "constraint row {index} is dependent on the preceding rows"
            )),
            other => other,
        })?;

        Ok(SaddleFactorization {
            a: a.clone(),
            b: b.clone(),
            chol,
            schur,
            eps,
            n,
            m,
        })
    }

    pub fn regularization(&self) -> f64 {
        self.eps
    }

    /// One application of the regularized inverse.
    fn apply(&self, f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let t = self.chol.solve(f);
        let mut r = vec![0.0; self.m];
        self.b.matvec(&t, &mut r);
        for (ri, gi) in r.iter_mut().zip(g) {
            *ri -= gi;
        }
        self.schur.solve(&mut r);
        let mut f2 = f.to_vec();
        self.b.transpose_matvec_add(&r, -1.0, &mut f2);
        self.chol.solve_in_place(&mut f2);
        (f2, r)
    }

    /// Solves the unregularized saddle system by iterative refinement.
    pub fn solve(&self, f: &[f64], g: &[f64]) -> Result<SaddleSolution> {
        let scale = norm(f).hypot(norm(g));
        if scale == 0.0 {
            return Ok(SaddleSolution {
                primal: vec![0.0; self.n],
                multipliers: vec![0.0; self.m],
                relative_residual: 0.0,
                refinements: 0,
                inertia: (self.n, self.m),
            });
        }
        let (mut x, mut y) = self.apply(f, g);
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let mut refinements = 0;
        for _ in 0..50 {
            let (rx, rg) = self.residuals(&x, &y, f, g);
            let res = norm(&rx).hypot(norm(&rg)) / scale;
            if best.as_ref().map_or(true, |(b, _, _)| res < *b) {
                best = Some((res, x.clone(), y.clone()));
            }
            if res < 1e-13 {
                break;
            }
            if let Some((b, _, _)) = &best {
                if res > 10.0 * b {
                    break; // diverging, keep the best iterate
                }
            }
            let (dx, dy) = self.apply(&rx, &rg);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            for (yi, di) in y.iter_mut().zip(&dy) {
                *yi += di;
            }
            refinements += 1;
        }
        let (res, x, y) = best.unwrap();
        if res > 1e-10 {
            return Err(Error::Residual {
                achieved: res,
                required: 1e-10,
            });
        }
        Ok(SaddleSolution {
            primal: x,
            multipliers: y,
            relative_residual: res,
            refinements,
            inertia: (self.n, self.m),
        })
    }

    fn residuals(&self, x: &[f64], y: &[f64], f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut ax = vec![0.0; self.n];
        self.a.matvec(x, &mut ax);
        let mut rx: Vec<f64> = f.iter().zip(&ax).map(|(fi, ai)| fi - ai).collect();
        self.b.transpose_matvec_add(y, -1.0, &mut rx);
        let mut bx = vec![0.0; self.m];
        self.b.matvec(x, &mut bx);
        let rg: Vec<f64> = g.iter().zip(&bx).map(|(gi, bi)| gi - bi).collect();
        (rx, rg)
    }
}

/// Factors and solves in one call.
pub fn solve_saddle(sys: &SaddleSystem) -> Result<SaddleSolution> {
    SaddleFactorization::new(&sys.a, &sys.b)?.solve(&sys.rhs_primal, &sys.rhs_constraint)
}
