use super::matrix::Matrix;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
///
/// Iteration stops once the off-diagonal Frobenius norm is at most `tol` (or the
/// rounding floor `n * eps * ||m||_F`, whichever is larger). By Weyl's inequality
/// every returned eigenvalue is then within that bound of an exact one.
pub fn symmetric_eigenvalues(m: &Matrix, tol: f64) -> Vec<f64> {
    assert!(m.is_symmetric(), "Jacobi iteration needs a symmetric matrix");
    let n = m.rows();
    let mut a = m.entries().to_vec();
    let floor = (n as f64) * f64::EPSILON * m.frobenius_norm();
    let stop = tol.max(floor);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, n, p, q, c, s);
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// `a <- J^T a J` with the rotation acting on coordinates `p < q`.
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    // Annihilated exactly in exact arithmetic.
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let mut ev = symmetric_eigenvalues(&m, 1e-14);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn trace_is_preserved() {
        let m = Matrix::from_rows(&[
            [4.0, -1.0, 0.5, 2.0],
            [-1.0, 3.0, 1.5, 0.0],
            [0.5, 1.5, -2.0, 1.0],
            [2.0, 0.0, 1.0, 1.0],
        ])
        .unwrap();
        let ev = symmetric_eigenvalues(&m, 1e-13);
        let trace: f64 = ev.iter().sum();
        assert!((trace - 6.0).abs() < 1e-12);
        let sq: f64 = ev.iter().map(|x| x * x).sum();
        assert!((sq - m.frobenius_norm().powi(2)).abs() < 1e-10);
    }
}
