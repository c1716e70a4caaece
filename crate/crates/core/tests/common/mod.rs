//! Independent reference computations built on nalgebra's SVD.

#![allow(dead_code)]

use std::collections::BTreeMap;

use l0_analysis::Matrix;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::new(m, n, gaussian_vec(rng, m * n)).unwrap()
}

pub fn to_na(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.entries())
}

pub fn columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

pub fn svd_rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-10 * top.max(f64::MIN_POSITIVE)).count()
}

/// Minimum-norm least-squares solution through the pseudo-inverse.
pub fn pinv_solve(m: &DMatrix<f64>, d: &[f64]) -> Vec<f64> {
    if m.ncols() == 0 {
        return vec![];
    }
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.max();
    let rhs = nalgebra::DVector::from_column_slice(d);
    svd.solve(&rhs, 1e-10 * top).unwrap().iter().copied().collect()
}

/// Orthogonal projector onto the span of `cols`, from the left singular vectors.
pub fn projector(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    let sub = columns(a, cols);
    let r = svd_rank(&sub);
    let u = sub.svd(true, false).u.unwrap();
    let ur = u.columns(0, r);
    ur * ur.transpose()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

#[derive(Clone, Debug)]
pub struct OracleMinimizer {
    /// 0-based.
    pub support: Vec<usize>,
    pub u: Vec<f64>,
    pub value: f64,
}

/// Every strict minimizer of `||A u - d||^2 + beta ||u||_0`: least squares on
/// each of the `2^N` supports, kept when the normal equations hold on the
/// solution's own support and that support has full column rank.
pub fn brute_force_minimizers(a: &Matrix, d: &[f64], beta: f64) -> Vec<OracleMinimizer> {
    let na = to_na(a);
    let n = a.cols();
    let dn = nalgebra::DVector::from_column_slice(d);
    let d_norm = dn.norm();
    let mut found: BTreeMap<Vec<usize>, OracleMinimizer> = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        let omega: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let x = pinv_solve(&columns(&na, &omega), d);
        let mut u = vec![0.0; n];
        for (k, &i) in omega.iter().enumerate() {
            u[i] = x[k];
        }
        let sigma: Vec<usize> = (0..n).filter(|&i| u[i].abs() > 1e-9).collect();
        let un = nalgebra::DVector::from_column_slice(&u);
        let r = &na * &un - &dn;
        let a_sigma = columns(&na, &sigma);
        let grad = a_sigma.transpose() * &r;
        if grad.amax() > 1e-8 * (1.0 + d_norm) {
            continue;
        }
        if svd_rank(&a_sigma) != sigma.len() {
            continue;
        }
        let value = r.norm_squared() + beta * sigma.len() as f64;
        found.entry(sigma.clone()).or_insert(OracleMinimizer {
            support: sigma,
            u,
            value,
        });
    }
    found.into_values().collect()
}
