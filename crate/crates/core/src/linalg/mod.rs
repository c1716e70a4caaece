//! Small dense real linear algebra.
//!
//! Everything here is deterministic and allocation-light; the matrices of
//! interest are at most a few dozen rows and columns.

mod jacobi;
mod matrix;
mod qr;

pub use jacobi::symmetric_eigenvalues;
pub use matrix::{dot, norm2, norm_inf, sub_vec, Matrix};
pub use qr::Qr;

use crate::error::{Error, Result};

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default absolute accuracy of [`spectral_norm`].
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-10;

fn check_finite(m: &Matrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("matrix has non-finite entries"))
    }
}

/// Numerical rank from a column-pivoted QR factorization.
///
/// A diagonal entry of `R` counts iff its magnitude exceeds `rel_tol` times the
/// largest one. A matrix without columns has rank 0.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    check_finite(m)?;
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::invalid("rank tolerance must be positive"));
    }
    if m.cols() == 0 || m.rows() == 0 {
        return Ok(0);
    }
    Ok(Qr::pivoted(m).rank(rel_tol))
}

/// Unique least-squares solution of `m v = rhs` for a full-column-rank `m`.
pub fn lstsq(m: &Matrix, rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.rows() != rhs.len() {
        return Err(Error::invalid(format!(
            "right-hand side has length {}, matrix has {} rows",
            rhs.len(),
            m.rows()
        )));
    }
    if m.cols() == 0 {
        return Ok(Vec::new());
    }
    Qr::pivoted(m).solve_full_rank(rhs, rel_tol)
}

/// Minimum-norm least-squares solution; accepts rank-deficient `m`.
pub fn lstsq_min_norm(m: &Matrix, rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.rows() != rhs.len() {
        return Err(Error::invalid(format!(
            "right-hand side has length {}, matrix has {} rows",
            rhs.len(),
            m.rows()
        )));
    }
    if m.cols() == 0 {
        return Ok(Vec::new());
    }
    Ok(Qr::pivoted(m).solve_min_norm(rhs, rel_tol))
}

/// Orthogonal projector `m (m^T m)^{-1} m^T` onto the column space of `m`.
///
/// Built as `Q1 Q1^T` from the thin QR factor, filled symmetrically so the result
/// is exactly symmetric. A zero-column input gives the `rows x rows` zero matrix.
pub fn projector(m: &Matrix, rel_tol: f64) -> Result<Matrix> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(Matrix::zeros(rows, rows));
    }
    let qr = Qr::pivoted(m);
    let rank = qr.rank(rel_tol);
    if rank < cols {
        return Err(Error::RankDeficient {
            support: None,
            rank,
            cols,
        });
    }
    let q = qr.thin_q(cols);
    let mut p = Matrix::zeros(rows, rows);
    for i in 0..rows {
        for j in 0..=i {
            let v = dot(q.row(i), q.row(j));
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    Ok(p)
}

/// Largest singular value, to absolute accuracy `tol`.
///
/// Symmetric input is diagonalized directly (its spectral norm is the largest
/// eigenvalue magnitude). Otherwise the symmetric dilation `[[0, m], [m^T, 0]]`,
/// whose eigenvalues are `±σ_i`, is used so that singular values are not squared.
pub fn spectral_norm(m: &Matrix, tol: f64) -> Result<f64> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    let eig = if m.is_symmetric() {
        symmetric_eigenvalues(m, tol)
    } else {
        let n = rows + cols;
        let mut d = Matrix::zeros(n, n);
        for i in 0..rows {
            for j in 0..cols {
                d[(i, rows + j)] = m[(i, j)];
                d[(rows + j, i)] = m[(i, j)];
            }
        }
        symmetric_eigenvalues(&d, tol)
    };
    Ok(eig.iter().fold(0.0, |acc, x| acc.max(x.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_a() -> Matrix {
        crate::experiments::builtin_instance("reference-5x10").unwrap().a
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&Matrix::zeros(5, 0), 1e-10).unwrap(), 0);
        let dup = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        assert_eq!(numerical_rank(&dup, 1e-10).unwrap(), 1);
        assert_eq!(numerical_rank(&reference_a(), 1e-10).unwrap(), 5);
        assert!(numerical_rank(&dup, 0.0).is_err());
    }

    #[test]
    fn lstsq_examples() {
        assert!(lstsq(&Matrix::zeros(3, 0), &[1.0, 2.0, 3.0], 1e-10)
            .unwrap()
            .is_empty());
        let a = Matrix::from_rows(&[[1.0], [-2.0], [0.5]]).unwrap();
        let x = lstsq(&a, &[2.0, -4.0, 1.0], 1e-10).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);

        let sub = reference_a().select_columns(&[2, 4, 9]);
        let x = lstsq(&sub, &[97.0, 130.0, 101.0, 85.0, 123.0], 1e-10).unwrap();
        let printed = [8.12, 3.31, 9.33];
        for (xi, p) in x.iter().zip(printed) {
            assert!(((xi * 100.0).round() / 100.0 - p).abs() < 1e-9, "{xi} vs {p}");
        }

        let dup = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert!(matches!(
            lstsq(&dup, &[1.0, 1.0], 1e-10),
            Err(Error::RankDeficient { rank: 1, cols: 2, .. })
        ));
    }

    #[test]
    fn projector_examples() {
        let z = projector(&Matrix::zeros(5, 0), 1e-10).unwrap();
        assert_eq!(z, Matrix::zeros(5, 5));

        let inv = Matrix::from_rows(&[[2.0, 1.0, 0.0], [0.0, 1.0, 3.0], [1.0, 0.0, 1.0]]).unwrap();
        let p = projector(&inv, 1e-10).unwrap();
        let id = Matrix::identity(3);
        assert!(p.sub(&id).max_abs() < 1e-10);

        let e1 = Matrix::from_rows(&[[1.0], [0.0], [0.0]]).unwrap();
        let p = projector(&e1, 1e-10).unwrap();
        let mut expected = Matrix::zeros(3, 3);
        expected[(0, 0)] = 1.0;
        assert!(p.sub(&expected).max_abs() < 1e-15);

        let dup = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert!(projector(&dup, 1e-10).is_err());
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&Matrix::zeros(3, 3), 1e-10).unwrap(), 0.0);
        let d = Matrix::from_rows(&[[3.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((spectral_norm(&d, 1e-10).unwrap() - 3.0).abs() < 1e-10);
        // Rectangular: singular values of [[3, 4]] are {5}.
        let r = Matrix::from_rows(&[[3.0, 4.0]]).unwrap();
        assert!((spectral_norm(&r, 1e-10).unwrap() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_norm_of_projector_gap_on_reference_pair() {
        // Supports {2,7,9,10} and {3,7,9,10} (1-based) of the reference matrix.
        let a = reference_a();
        let p1 = projector(&a.select_columns(&[1, 6, 8, 9]), 1e-10).unwrap();
        let p2 = projector(&a.select_columns(&[2, 6, 8, 9]), 1e-10).unwrap();
        let s = spectral_norm(&p1.sub(&p2), 1e-10).unwrap();
        assert!((s - 0.0564).abs() < 5e-5, "{s}");
    }
}
