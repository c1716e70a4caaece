//! Problem instances, supports and the penalized objective
//! `F(u) = ||A u - d||^2 + beta * ||u||_0`.

pub mod io;
mod support;

pub use support::Support;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2, Matrix};

/// Numerical thresholds shared by every routine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative threshold on pivoted-QR diagonals for rank decisions.
    pub rank: f64,
    /// Absolute magnitude below which an entry counts as zero.
    pub zero: f64,
    /// Relative bound on the normal-equation residual of a local minimizer.
    pub cert: f64,
    /// Relative tolerance for objective value comparisons.
    pub value: f64,
    /// Spectral-norm gap below which two projectors are declared equal.
    pub proj: f64,
    /// Absolute accuracy requested from spectral norms.
    pub spectral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: linalg::DEFAULT_RANK_TOL,
            zero: 1e-9,
            cert: 1e-8,
            value: 1e-9,
            proj: 1e-9,
            spectral: linalg::DEFAULT_SPECTRAL_TOL,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("rank", self.rank),
            ("cert", self.cert),
            ("value", self.value),
            ("proj", self.proj),
            ("spectral", self.spectral),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} tolerance must be positive")));
            }
        }
        if !(self.zero >= 0.0 && self.zero.is_finite()) {
            return Err(Error::invalid("zero tolerance must be nonnegative"));
        }
        Ok(())
    }

    /// Absolute slack for comparing objective values near `scale`.
    pub fn value_slack(&self, scale: f64) -> f64 {
        self.value * (1.0 + scale.abs())
    }
}

/// Caps on exhaustive enumeration sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budget {
    /// Largest number of supports any single enumeration may visit.
    pub max_supports: u128,
    /// Largest number of support pairs a projector scan may visit.
    pub max_pairs: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_supports: 2_000_000,
            max_pairs: 50_000_000,
        }
    }
}

impl Budget {
    pub(crate) fn check_supports(&self, count: u128) -> Result<()> {
        if count > self.max_supports {
            return Err(Error::BudgetExceeded {
                what: "supports",
                count,
                cap: self.max_supports,
            });
        }
        Ok(())
    }

    pub(crate) fn check_pairs(&self, count: u128) -> Result<()> {
        if count > self.max_pairs {
            return Err(Error::BudgetExceeded {
                what: "support pairs",
                count,
                cap: self.max_pairs,
            });
        }
        Ok(())
    }
}

/// An instance `(A, d, beta)` with `A` of size `M x N`, `M < N`, and no zero column.
#[derive(Clone, Debug)]
pub struct Problem {
    a: Matrix,
    d: Vec<f64>,
    beta: f64,
    tol: Tolerances,
    column_norms: Vec<f64>,
}

impl Problem {
    pub fn new(a: Matrix, d: Vec<f64>, beta: f64) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        if m >= n {
            return Err(Error::invalid(format!(
                "matrix must have fewer rows than columns, got {m}x{n}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let column_norms: Vec<f64> = (0..n).map(|j| norm2(&a.column(j))).collect();
        if let Some(j) = column_norms.iter().position(|&c| c == 0.0) {
            return Err(Error::invalid(format!("column {} is zero", j + 1)));
        }
        check_data(&d, m)?;
        check_beta(beta)?;
        Ok(Problem {
            a,
            d,
            beta,
            tol: Tolerances::default(),
            column_norms,
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Result<Self> {
        tol.validate()?;
        self.tol = tol;
        Ok(self)
    }

    /// Same matrix and data with another penalty.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Problem {
            beta,
            ..self.clone()
        })
    }

    /// Same matrix and penalty with other data.
    pub fn with_data(&self, d: Vec<f64>) -> Result<Self> {
        check_data(&d, self.m())?;
        Ok(Problem { d, ..self.clone() })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Euclidean norm of column `i` (0-based).
    pub fn column_norm(&self, i: usize) -> f64 {
        self.column_norms[i]
    }

    /// `A_omega`, the columns of `A` indexed by `omega`.
    pub fn submatrix(&self, omega: &Support) -> Matrix {
        self.a.select_columns(omega.indices())
    }

    /// `||d||^2`.
    pub fn data_energy(&self) -> f64 {
        dot(&self.d, &self.d)
    }
}

fn check_data(d: &[f64], m: usize) -> Result<()> {
    if d.len() != m {
        return Err(Error::invalid(format!(
            "data has length {}, matrix has {m} rows",
            d.len()
        )));
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("data has non-finite entries"));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// Indices `i` with `|u[i]| > zero_tol`.
pub fn support_of(u: &[f64], zero_tol: f64) -> Support {
    Support::from_sorted_unchecked(
        u.iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > zero_tol)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// `||A u - d||^2`.
pub fn residual_sq(p: &Problem, u: &[f64]) -> f64 {
    assert_eq!(u.len(), p.n(), "vector length must equal the number of columns");
    let au = p.a.matvec(u);
    au.iter().zip(&p.d).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `F(u) = ||A u - d||^2 + beta * #{i : |u[i]| > zero_tol}`.
pub fn objective(p: &Problem, u: &[f64]) -> f64 {
    objective_at(p, u, p.beta)
}

/// Objective with an explicit penalty, leaving `p.beta()` untouched.
pub fn objective_at(p: &Problem, u: &[f64], beta: f64) -> f64 {
    residual_sq(p, u) + beta * support_of(u, p.tol.zero).len() as f64
}

/// Scatter `sub` into a length-`n` vector at the positions of `omega`.
pub fn zero_pad(sub: &[f64], omega: &Support, n: usize) -> Result<Vec<f64>> {
    if sub.len() != omega.len() {
        return Err(Error::invalid(format!(
            "{} values for a support of size {}",
            sub.len(),
            omega.len()
        )));
    }
    omega.check_within(n)?;
    let mut u = vec![0.0; n];
    for (&i, &x) in omega.indices().iter().zip(sub) {
        u[i] = x;
    }
    Ok(u)
}

/// `u_omega`, the entries of `u` at the positions of `omega`.
pub fn restrict(u: &[f64], omega: &Support) -> Vec<f64> {
    omega.indices().iter().map(|&i| u[i]).collect()
}

/// A vector certified as a (local) minimizer of the objective.
#[derive(Clone, Debug, Serialize)]
pub struct CertifiedMinimizer {
    pub u: Vec<f64>,
    pub support: Support,
    /// `F(u)` at the problem's penalty.
    pub value: f64,
    /// Whether `A` restricted to the support has full column rank.
    pub is_strict: bool,
    /// Whether the support is strictly smaller than the one requested.
    pub shrunk: bool,
}

impl CertifiedMinimizer {
    pub fn cardinality(&self) -> usize {
        self.support.len()
    }

    /// Nonzero entries, in support order.
    pub fn nonzeros(&self) -> Vec<f64> {
        restrict(&self.u, &self.support)
    }
}
