//! Householder QR with optional column pivoting.
//!
//! `A P = Q R` where `P` permutes columns so that the diagonal of `R` is
//! non-increasing in magnitude. The reflectors are kept in factored form;
//! `Q` is never formed explicitly unless asked for.

use super::matrix::{dot, Matrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Reflector {
    /// First row the reflector acts on.
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        if self.beta == 0.0 {
            return;
        }
        let tail = &mut x[self.offset..self.offset + self.v.len()];
        let s = self.beta * dot(&self.v, tail);
        for (t, v) in tail.iter_mut().zip(&self.v) {
            *t -= s * v;
        }
    }
}

/// Householder QR factorization, column-pivoted when built with [`Qr::pivoted`].
#[derive(Clone, Debug)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Upper trapezoidal factor, `rows x cols` (entries below the diagonal are zero).
    r: Matrix,
    reflectors: Vec<Reflector>,
    /// `perm[k]` is the original index of the column moved to position `k`.
    perm: Vec<usize>,
}

impl Qr {
    pub fn pivoted(m: &Matrix) -> Self {
        Self::factor(m, true)
    }

    pub fn unpivoted(m: &Matrix) -> Self {
        Self::factor(m, false)
    }

    fn factor(m: &Matrix, pivot: bool) -> Self {
        let (rows, cols) = m.shape();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut reflectors = Vec::with_capacity(rows.min(cols));

        for k in 0..rows.min(cols) {
            if pivot {
                // Norms are recomputed rather than downdated; matrices here are tiny.
                let mut best = k;
                let mut best_norm = -1.0;
                for j in k..cols {
                    let n: f64 = (k..rows).map(|i| a[(i, j)] * a[(i, j)]).sum();
                    if n > best_norm {
                        best_norm = n;
                        best = j;
                    }
                }
                if best != k {
                    for i in 0..rows {
                        let tmp = a[(i, k)];
                        a[(i, k)] = a[(i, best)];
                        a[(i, best)] = tmp;
                    }
                    perm.swap(k, best);
                }
            }

            let x: Vec<f64> = (k..rows).map(|i| a[(i, k)]).collect();
            let norm = dot(&x, &x).sqrt();
            if norm == 0.0 {
                reflectors.push(Reflector {
                    offset: k,
                    v: x,
                    beta: 0.0,
                });
                continue;
            }
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v = x;
            v[0] -= alpha;
            let beta = 2.0 / dot(&v, &v);
            let h = Reflector { offset: k, v, beta };

            let mut col = vec![0.0; rows];
            for j in k + 1..cols {
                for i in k..rows {
                    col[i] = a[(i, j)];
                }
                h.apply(&mut col);
                for i in k..rows {
                    a[(i, j)] = col[i];
                }
            }
            a[(k, k)] = alpha;
            for i in k + 1..rows {
                a[(i, k)] = 0.0;
            }
            reflectors.push(h);
        }

        Qr {
            rows,
            cols,
            r: a,
            reflectors,
            perm,
        }
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Magnitudes of the diagonal of `R`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|k| self.r[(k, k)].abs())
            .collect()
    }

    /// Number of diagonal entries of `R` exceeding `rel_tol` times the largest one.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let diag = self.diagonal();
        let largest = diag.iter().fold(0.0_f64, |m, &x| m.max(x));
        if largest == 0.0 {
            return 0;
        }
        diag.iter().filter(|&&x| x > rel_tol * largest).count()
    }

    /// `Q^T x`.
    pub fn apply_qt(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = x.to_vec();
        for h in &self.reflectors {
            h.apply(&mut y);
        }
        y
    }

    /// `Q x`.
    pub fn apply_q(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = x.to_vec();
        for h in self.reflectors.iter().rev() {
            h.apply(&mut y);
        }
        y
    }

    /// First `k` columns of `Q`, as a `rows x k` matrix.
    pub fn thin_q(&self, k: usize) -> Matrix {
        let mut q = Matrix::zeros(self.rows, k);
        let mut e = vec![0.0; self.rows];
        for j in 0..k {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.apply_q(&e);
            for (i, c) in col.into_iter().enumerate() {
                q[(i, j)] = c;
            }
        }
        q
    }

    /// Least-squares solution for a full-column-rank factor.
    pub fn solve_full_rank(&self, rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
        let rank = self.rank(rel_tol);
        if rank < self.cols {
            return Err(Error::RankDeficient {
                support: None,
                rank,
                cols: self.cols,
            });
        }
        let c = self.apply_qt(rhs);
        let z = back_substitute(&self.r, &c[..self.cols]);
        let mut x = vec![0.0; self.cols];
        for (k, &j) in self.perm.iter().enumerate() {
            x[j] = z[k];
        }
        Ok(x)
    }

    /// Minimum-norm least-squares solution through a complete orthogonal decomposition.
    ///
    /// With numerical rank `r`, the leading `r` rows of `R` form `T = [R11 R12]`.
    /// Factoring `T^T = Z [U; 0]` gives `T = [U^T 0] Z^T`, so the minimum-norm
    /// solution of `T y = c` is `y = Z [U^{-T} c; 0]`.
    pub fn solve_min_norm(&self, rhs: &[f64], rel_tol: f64) -> Vec<f64> {
        let rank = self.rank(rel_tol);
        let mut x = vec![0.0; self.cols];
        if rank == 0 {
            return x;
        }
        let c = self.apply_qt(rhs);
        if rank == self.cols {
            let z = back_substitute(&self.r, &c[..rank]);
            for (k, &j) in self.perm.iter().enumerate() {
                x[j] = z[k];
            }
            return x;
        }

        let mut tt = Matrix::zeros(self.cols, rank);
        for i in 0..rank {
            for j in i..self.cols {
                tt[(j, i)] = self.r[(i, j)];
            }
        }
        let z = Qr::unpivoted(&tt);
        // U^T w = c, forward substitution with U = z.r[..rank, ..rank].
        let u = z.r();
        let mut w = vec![0.0; self.cols];
        for i in 0..rank {
            let s: f64 = (0..i).map(|k| u[(k, i)] * w[k]).sum();
            w[i] = (c[i] - s) / u[(i, i)];
        }
        let y = z.apply_q(&w);
        for (k, &j) in self.perm.iter().enumerate() {
            x[j] = y[k];
        }
        x
    }
}

/// Solve `R z = c` for the leading square block of an upper-triangular `R`.
fn back_substitute(r: &Matrix, c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| r[(i, k)] * z[k]).sum();
        z[i] = (c[i] - s) / r[(i, i)];
    }
    z
}
