//! Restricted least-squares problems and minimizer certificates.
//!
//! For a support `omega`, the restricted problem minimizes `||A u - d||^2` over
//! vectors vanishing off `omega`. Its solutions are exactly the (local) minimizers
//! of the penalized objective, whatever the value of `beta`: a vector is a local
//! minimizer iff it satisfies the normal equations on its own support, and the
//! minimum is strict iff the columns on that support are linearly independent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, norm2, norm_inf, Matrix, Qr};
use crate::model::{objective, restrict, support_of, zero_pad, CertifiedMinimizer, Problem, Support};

/// Solve the restricted problem on `omega` and certify the result.
///
/// Full-column-rank `A_omega` gives the unique solution; otherwise the
/// minimum-norm one is returned (a nonstrict local minimizer).
pub fn solve_restricted(p: &Problem, omega: &Support) -> Result<CertifiedMinimizer> {
    omega.check_within(p.n())?;
    let tol = p.tol();
    let sub = if omega.is_empty() {
        Vec::new()
    } else {
        let am = p.submatrix(omega);
        let qr = Qr::pivoted(&am);
        if qr.rank(tol.rank) == omega.len() {
            qr.solve_full_rank(p.d(), tol.rank)
                .map_err(|e| e.on_support(omega))?
        } else {
            qr.solve_min_norm(p.d(), tol.rank)
        }
    };
    let u = zero_pad(&sub, omega, p.n())?;
    certify(p, u, omega)
}

/// Package `u` (a solution of the restricted problem on `requested`) with its certificates.
fn certify(p: &Problem, u: Vec<f64>, requested: &Support) -> Result<CertifiedMinimizer> {
    let support = support_of(&u, p.tol().zero);
    let rank = linalg::numerical_rank(&p.submatrix(&support), p.tol().rank)?;
    Ok(CertifiedMinimizer {
        value: objective(p, &u),
        is_strict: rank == support.len(),
        shrunk: support.len() < requested.len(),
        support,
        u,
    })
}

/// `||A_s^T (A_s u_s - d)||_inf` on `s = support(u)`.
pub fn normal_equation_residual(p: &Problem, u: &[f64]) -> f64 {
    assert_eq!(u.len(), p.n());
    let sigma = support_of(u, p.tol().zero);
    if sigma.is_empty() {
        return 0.0;
    }
    let am = p.submatrix(&sigma);
    let r = linalg::sub_vec(&am.matvec(&restrict(u, &sigma)), p.d());
    norm_inf(&am.tr_matvec(&r))
}

/// Normal-equation test on the support of `u`:
/// `||A_s^T A_s u_s - A_s^T d||_inf <= cert_tol * (1 + ||d||)`.
pub fn is_local_minimizer(p: &Problem, u: &[f64]) -> bool {
    normal_equation_residual(p, u) <= p.tol().cert * (1.0 + norm2(p.d()))
}

/// Rank test `rank(A_s) = #s` for a vector already known to be a local minimizer.
pub fn is_strict_minimizer(p: &Problem, u: &[f64]) -> Result<bool> {
    if !is_local_minimizer(p, u) {
        return Err(Error::ContractViolation(
            "strictness is only defined for local minimizers".into(),
        ));
    }
    let sigma = support_of(u, p.tol().zero);
    Ok(linalg::numerical_rank(&p.submatrix(&sigma), p.tol().rank)? == sigma.len())
}

/// The linear map `d -> (A_w^T A_w)^{-1} A_w^T d` for a full-column-rank support `w`.
#[derive(Clone, Debug, Serialize)]
pub struct MinimizerFunctionMatrix {
    pub omega: Support,
    /// `#omega x M`.
    pub u_matrix: Matrix,
}

impl MinimizerFunctionMatrix {
    /// Nonzero part `U d`.
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        self.u_matrix.matvec(d)
    }

    /// Full-length minimizer `Z_omega(U d)`.
    pub fn apply_padded(&self, d: &[f64], n: usize) -> Vec<f64> {
        zero_pad(&self.apply(d), &self.omega, n).expect("support sized by construction")
    }
}

pub fn minimizer_function(p: &Problem, omega: &Support) -> Result<MinimizerFunctionMatrix> {
    omega.check_within(p.n())?;
    let m = p.m();
    let k = omega.len();
    let mut u_matrix = Matrix::zeros(k, m);
    if k > 0 {
        let am = p.submatrix(omega);
        let qr = Qr::pivoted(&am);
        let mut e = vec![0.0; m];
        for j in 0..m {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = qr
                .solve_full_rank(&e, p.tol().rank)
                .map_err(|err| err.on_support(omega))?;
            for (i, c) in col.into_iter().enumerate() {
                u_matrix[(i, j)] = c;
            }
        }
    }
    Ok(MinimizerFunctionMatrix {
        omega: omega.clone(),
        u_matrix,
    })
}

/// Which one-dimensional minimizer wins along a coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Zero,
    NonZero,
    Tie,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoordinateVerdict {
    /// 0-based.
    pub index: usize,
    /// `f(0)`: objective with coordinate `index` zeroed.
    pub f_zero: f64,
    /// `f(t1)` at the best nonzero value `t1`.
    pub f_nonzero: f64,
    pub t_nonzero: f64,
    pub winner: Winner,
    /// Whether `u[index]` is a global minimizer of the one-dimensional restriction.
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoordinatewiseReport {
    pub coordinates: Vec<CoordinateVerdict>,
    pub passes: bool,
}

/// Check every coordinate of `u` against the two candidate minimizers of
/// `t -> F(u with u[i] replaced by t)`, namely `0` and
/// `t1 = -<a_i, A u^(i) - d> / ||a_i||^2`.
pub fn coordinatewise_check(p: &Problem, u: &[f64]) -> CoordinatewiseReport {
    assert_eq!(u.len(), p.n());
    let tol = p.tol();
    let a = p.a();
    let au = a.matvec(u);
    let base_support = support_of(u, tol.zero).len();

    let coordinates: Vec<CoordinateVerdict> = (0..p.n())
        .map(|i| {
            let col = a.column(i);
            // r = A u^(i) - d
            let r: Vec<f64> = au
                .iter()
                .zip(&col)
                .zip(p.d())
                .map(|((x, c), d)| x - c * u[i] - d)
                .collect();
            let nonzero_elsewhere = base_support - usize::from(u[i].abs() > tol.zero);
            let c = linalg::dot(&r, &r) + p.beta() * nonzero_elsewhere as f64;
            let g = linalg::dot(&col, &r);
            let an2 = p.column_norm(i).powi(2);
            let t1 = -g / an2;
            let f1 = -g * g / an2 + p.beta() + c;

            let slack = tol.value_slack(c);
            let is_zero = u[i].abs() <= tol.zero;
            let is_t1 = (u[i] - t1).abs() <= tol.zero * (1.0 + t1.abs()) && !is_zero;
            let (winner, ok) = if (c - f1).abs() <= slack {
                (Winner::Tie, is_zero || is_t1)
            } else if c < f1 {
                (Winner::Zero, is_zero)
            } else {
                (Winner::NonZero, is_t1)
            };
            CoordinateVerdict {
                index: i,
                f_zero: c,
                f_nonzero: f1,
                t_nonzero: t1,
                winner,
                ok,
            }
        })
        .collect();
    let passes = coordinates.iter().all(|v| v.ok);
    CoordinatewiseReport {
        coordinates,
        passes,
    }
}

/// `min_{i in support(u)} |u[i]| - sqrt(beta) / ||a_i||`; `f64::MAX` for `u = 0`.
///
/// Every global minimizer has a nonnegative margin.
pub fn necessary_condition_margin(p: &Problem, u: &[f64]) -> f64 {
    let sb = p.beta().sqrt();
    support_of(u, p.tol().zero)
        .indices()
        .iter()
        .map(|&i| u[i].abs() - sb / p.column_norm(i))
        .fold(f64::MAX, f64::min)
}
