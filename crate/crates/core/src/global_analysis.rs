//! Global minimizers, penalty thresholds and projector-geometry quantifiers.
//!
//! Every global minimizer of the objective is strict, so the global minimum is
//! the smallest value found by [`enumerate_strict_minimizers`]. Uniqueness is
//! governed by the orthogonal projectors `P_w` onto the column spans of the
//! full-rank submatrices: two candidates `w != v` tie exactly when
//! `d^T (P_w - P_v) d = beta (#w - #v)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::enumeration::{binomial, build_support_family, enumerate_strict_minimizers, full_rank_supports, supports_up_to, EnumerationResult};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};
use crate::minimizers::{necessary_condition_margin, solve_restricted};
use crate::model::{residual_sq, Budget, CertifiedMinimizer, Problem, Support, Tolerances};

/// Global minimizer(s) among the strict minimizers of size at most `k_max`.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalReport {
    pub beta: f64,
    pub k_max: usize,
    /// All candidates whose value is within `value_tol` of the best one.
    pub minimizers: Vec<CertifiedMinimizer>,
    /// `necessary_condition_margin` of each reported minimizer.
    pub necessary_margins: Vec<f64>,
    pub best_value: f64,
    pub second_value: Option<f64>,
    /// Second-smallest minus smallest value; `None` with a single candidate.
    pub uniqueness_gap: Option<f64>,
    /// The gap is below the value tolerance.
    pub numerically_tied: bool,
    pub candidates: usize,
}

impl GlobalReport {
    /// The single global minimizer, when it is unique.
    pub fn unique(&self) -> Option<&CertifiedMinimizer> {
        (!self.numerically_tied).then(|| &self.minimizers[0])
    }
}

pub fn global_minimizers(p: &Problem, k_max: usize, budget: &Budget) -> Result<GlobalReport> {
    let e = enumerate_strict_minimizers(p, k_max, budget)?;
    Ok(global_from_enumeration(p, &e))
}

/// Extract the global report from an existing enumeration of `p`.
pub fn global_from_enumeration(p: &Problem, e: &EnumerationResult) -> GlobalReport {
    let best_value = e.minimizers[0].value;
    let slack = p.tol().value_slack(best_value);
    let minimizers: Vec<CertifiedMinimizer> = e
        .minimizers
        .iter()
        .take_while(|m| m.value - best_value <= slack)
        .cloned()
        .collect();
    let necessary_margins = minimizers
        .iter()
        .map(|m| necessary_condition_margin(p, &m.u))
        .collect();
    let second_value = e.minimizers.get(1).map(|m| m.value);
    let uniqueness_gap = second_value.map(|v| v - best_value);
    GlobalReport {
        beta: e.beta,
        k_max: e.k_max,
        numerically_tied: minimizers.len() > 1,
        minimizers,
        necessary_margins,
        best_value,
        second_value,
        uniqueness_gap,
        candidates: e.len(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Residual at the lexicographically first full-rank support of size `k`.
    Loose,
    /// Smallest residual over all full-rank supports of size `k`.
    Sharp,
}

impl std::str::FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loose" => Ok(ThresholdMode::Loose),
            "sharp" => Ok(ThresholdMode::Sharp),
            other => Err(Error::invalid(format!("unknown threshold mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Threshold {
    pub k: usize,
    pub mode: ThresholdMode,
    /// For every `beta` above this value all global minimizers have at most `k` nonzeros.
    pub beta_k: f64,
    /// Support whose restricted residual defines the threshold.
    pub support: Support,
}

/// Penalty threshold `beta_k = ||A u~ - d||^2`, `u~` the restricted solution on
/// a full-rank `k`-support (the first one, or the best one in sharp mode).
pub fn beta_k(p: &Problem, k: usize, mode: ThresholdMode, budget: &Budget) -> Result<Threshold> {
    if k == 0 || k >= p.m() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            p.m() - 1
        )));
    }
    budget.check_supports(binomial(p.n(), k))?;
    let omega_k = full_rank_supports(p.a(), k, p.tol());
    if omega_k.is_empty() {
        return Err(Error::Infeasible(format!(
            "no {k} columns are linearly independent"
        )));
    }
    let residual = |w: &Support| -> Result<f64> {
        let m = solve_restricted(p, w)?;
        Ok(residual_sq(p, &m.u))
    };
    let (beta_k, support) = match mode {
        ThresholdMode::Loose => (residual(&omega_k[0])?, omega_k[0].clone()),
        ThresholdMode::Sharp => {
            let values: Vec<f64> = omega_k.par_iter().map(residual).collect::<Result<_>>()?;
            let (i, v) = values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .expect("nonempty");
            (*v, omega_k[i].clone())
        }
    };
    Ok(Threshold {
        k,
        mode,
        beta_k,
        support,
    })
}

/// Projectors onto the column spans of a list of full-rank supports.
#[derive(Clone, Debug)]
pub struct ProjectorCache {
    pub supports: Vec<Support>,
    pub projectors: Vec<Matrix>,
}

impl ProjectorCache {
    pub fn build(a: &Matrix, supports: Vec<Support>, tol: &Tolerances) -> Result<Self> {
        let projectors = supports
            .par_iter()
            .map(|w| linalg::projector(&a.select_columns(w.indices()), tol.rank).map_err(|e| e.on_support(w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectorCache {
            supports,
            projectors,
        })
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }
}

/// Closest pair found by a projector scan.
#[derive(Clone, Copy, Debug, PartialEq)]
struct PairMin {
    value: f64,
    i: usize,
    j: usize,
}

impl PairMin {
    const NONE: PairMin = PairMin {
        value: f64::INFINITY,
        i: usize::MAX,
        j: usize::MAX,
    };

    fn better(self, other: PairMin) -> PairMin {
        let key = |p: &PairMin| (p.value, p.i, p.j);
        if key(&other).partial_cmp(&key(&self)) == Some(std::cmp::Ordering::Less) {
            other
        } else {
            self
        }
    }
}

/// `min_{i<j} ||P_i - P_j||_2` over all pairs of the cache.
///
/// Pairs whose cheap lower bound `max(max|x_ij|, ||X||_F / sqrt(rank))` already
/// exceeds the running minimum are skipped without diagonalizing.
fn closest_projector_pair(cache: &ProjectorCache, rank_bound: usize, tol: &Tolerances) -> PairMin {
    let n = cache.len();
    let sqrt_rank = (rank_bound.max(1) as f64).sqrt();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = PairMin::NONE;
            for j in i + 1..n {
                let diff = cache.projectors[i].sub(&cache.projectors[j]);
                let lower = diff.max_abs().max(diff.frobenius_norm() / sqrt_rank);
                if lower > best.value {
                    continue;
                }
                let value = linalg::spectral_norm(&diff, tol.spectral).expect("finite projectors");
                best = best.better(PairMin { value, i, j });
            }
            best
        })
        .reduce(|| PairMin::NONE, PairMin::better)
}

/// Result of testing that distinct equal-size full-rank supports span distinct subspaces.
#[derive(Clone, Debug, Serialize)]
pub struct H1Report {
    pub k: usize,
    pub holds: bool,
    /// A pair with (numerically) identical projectors, when the assumption fails.
    pub witness: Option<(Support, Support)>,
    /// `mu[r - 1] = min ||P_w - P_v||_2` over distinct `w, v` of size `r`.
    pub mu: Vec<f64>,
    /// `xi[r - 1] = min(mu[0..r])`.
    pub xi: Vec<f64>,
    /// The pair attaining `mu[r - 1]`.
    pub closest_pairs: Vec<Option<(Support, Support)>>,
}

/// Exhaustive projector-gap scan for every support size `1..=k`.
pub fn h1_check(a: &Matrix, k: usize, tol: &Tolerances, budget: &Budget) -> Result<H1Report> {
    if k == 0 || k >= a.rows() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            a.rows().saturating_sub(1)
        )));
    }
    budget.check_supports(supports_up_to(a.cols(), k))?;
    let families: Vec<Vec<Support>> = (1..=k).map(|r| full_rank_supports(a, r, tol)).collect();
    let pairs: u128 = families.iter().map(|f| binomial(f.len(), 2)).sum();
    budget.check_pairs(pairs)?;

    let mut mu = Vec::with_capacity(k);
    let mut closest_pairs = Vec::with_capacity(k);
    let mut witness = None;
    for (r, family) in (1..=k).zip(families) {
        let cache = ProjectorCache::build(a, family, tol)?;
        let best = closest_projector_pair(&cache, (2 * r).min(a.rows()), tol);
        if best.i == usize::MAX {
            mu.push(f64::INFINITY);
            closest_pairs.push(None);
            continue;
        }
        let pair = (cache.supports[best.i].clone(), cache.supports[best.j].clone());
        if best.value <= tol.proj && witness.is_none() {
            witness = Some(pair.clone());
        }
        mu.push(best.value);
        closest_pairs.push(Some(pair));
    }
    let xi = running_min(&mu);
    Ok(H1Report {
        k,
        holds: witness.is_none(),
        witness,
        mu,
        xi,
        closest_pairs,
    })
}

fn running_min(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(f64::INFINITY, |m, &x| {
            *m = m.min(x);
            Some(*m)
        })
        .collect()
}

/// Cheap upper bounds on `mu_r`, `r = 1..=k`: each full-rank `r`-support is
/// compared only with its cyclic successor in colexicographic order.
///
/// Useful as a quick screen; the exhaustive values come from [`h1_check`].
pub fn neighbour_scan_upper_bounds(a: &Matrix, k: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    (1..=k)
        .map(|r| {
            let mut family = full_rank_supports(a, r, tol);
            family.sort_by(|x, y| x.indices().iter().rev().cmp(y.indices().iter().rev()));
            let cache = ProjectorCache::build(a, family, tol)?;
            let n = cache.len();
            if n < 2 {
                return Ok(f64::INFINITY);
            }
            let best = (0..n)
                .map(|i| {
                    let diff = cache.projectors[i].sub(&cache.projectors[(i + 1) % n]);
                    linalg::spectral_norm(&diff, tol.spectral).expect("finite projectors")
                })
                .fold(f64::INFINITY, f64::min);
            Ok(best)
        })
        .collect()
}

/// Distance of the data from the tie set: the smallest `|d^T (P_w - P_v) d - n beta|`
/// over `n in -k..=k` and distinct full-rank supports `w, v` of size at most `k`.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaMargin {
    pub k: usize,
    pub beta: f64,
    pub margin: f64,
    /// Pair and multiple `n` attaining the margin.
    pub pair: Option<(Support, Support)>,
    pub n: i64,
}

pub fn sigma_k_margin(p: &Problem, k: usize, budget: &Budget) -> Result<SigmaMargin> {
    if k == 0 || k >= p.m() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            p.m() - 1
        )));
    }
    let family = build_support_family(p.a(), k, p.tol(), budget)?;
    let supports: Vec<Support> = family.iter().cloned().collect();
    budget.check_pairs(binomial(supports.len(), 2))?;
    let cache = ProjectorCache::build(p.a(), supports, p.tol())?;
    let d = p.d();
    let energies: Vec<f64> = cache
        .projectors
        .iter()
        .map(|proj| dot(d, &proj.matvec(d)))
        .collect();

    let beta = p.beta();
    let kk = k as i64;
    let closest = |x: f64| -> (f64, i64) {
        let n = ((x / beta).round() as i64).clamp(-kk, kk);
        ((x - n as f64 * beta).abs(), n)
    };
    let count = energies.len();
    let best = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, usize::MAX, usize::MAX, 0i64);
            for j in i + 1..count {
                let (v, n) = closest(energies[i] - energies[j]);
                if v < best.0 {
                    best = (v, i, j, n);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX, 0),
            |a, b| {
                if (b.0, b.1, b.2) < (a.0, a.1, a.2) {
                    b
                } else {
                    a
                }
            },
        );
    let pair = (best.1 != usize::MAX)
        .then(|| (cache.supports[best.1].clone(), cache.supports[best.2].clone()));
    Ok(SigmaMargin {
        k,
        beta,
        margin: best.0,
        pair,
        n: best.3,
    })
}

/// Worst/best projector-gap quantifiers over a set of same-shape matrices.
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleStats {
    pub k: usize,
    pub count: usize,
    /// `xi_worst[r - 1] = min over matrices of xi_r`.
    pub xi_worst: Vec<f64>,
    /// `xi_best[r - 1] = max over matrices of xi_r`.
    pub xi_best: Vec<f64>,
    /// `tie_rates[j - 1]`: fraction of matrices with `xi_j = xi_{j+1}`.
    pub tie_rates: Vec<f64>,
    /// Fraction of matrices where `xi_1 > ... > xi_k` fails anywhere.
    pub violation_rate: f64,
    /// Whether every matrix passed the H1 check.
    pub all_hold: bool,
    pub xi: Vec<Vec<f64>>,
}

pub fn ensemble_stats(
    ensemble: &[Matrix],
    k: usize,
    tol: &Tolerances,
    budget: &Budget,
) -> Result<EnsembleStats> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::invalid("ensemble is empty"))?;
    if ensemble.iter().any(|m| m.shape() != first.shape()) {
        return Err(Error::invalid("ensemble matrices differ in shape"));
    }
    let reports = ensemble
        .iter()
        .map(|a| h1_check(a, k, tol, budget))
        .collect::<Result<Vec<_>>>()?;
    let count = reports.len();
    let xi: Vec<Vec<f64>> = reports.iter().map(|r| r.xi.clone()).collect();
    let xi_worst = (0..k)
        .map(|r| xi.iter().map(|x| x[r]).fold(f64::INFINITY, f64::min))
        .collect();
    let xi_best = (0..k)
        .map(|r| xi.iter().map(|x| x[r]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let tie_rates = (0..k.saturating_sub(1))
        .map(|j| xi.iter().filter(|x| x[j] == x[j + 1]).count() as f64 / count as f64)
        .collect();
    let violations = xi
        .iter()
        .filter(|x| x.windows(2).any(|w| w[0] <= w[1]))
        .count();
    Ok(EnsembleStats {
        k,
        count,
        xi_worst,
        xi_best,
        tie_rates,
        violation_rate: violations as f64 / count as f64,
        all_hold: reports.iter().all(|r| r.holds),
        xi,
    })
}

/// One global minimizer in an [`AnalysisReport`].
#[derive(Clone, Debug, Serialize)]
pub struct GlobalEntry {
    pub support: Support,
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Global minimizers together with the quantifiers that certify them.
///
/// The quantifiers are evaluated at `min(k_max, M - 1)`; with `k_max = 0`
/// they are skipped.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    /// Sharp threshold; `None` when no support of that size is full rank.
    pub beta_k: Option<f64>,
    pub xi: Vec<f64>,
    pub mu: Vec<f64>,
    pub h1: bool,
    pub witness: Option<(Support, Support)>,
    pub sigma_margin: Option<f64>,
    pub global: Vec<GlobalEntry>,
    pub gap: Option<f64>,
}

pub fn analyze(p: &Problem, k_max: usize, budget: &Budget) -> Result<AnalysisReport> {
    let g = global_minimizers(p, k_max, budget)?;
    let global = g
        .minimizers
        .iter()
        .map(|m| GlobalEntry {
            support: m.support.clone(),
            values: m.nonzeros(),
            objective: m.value,
        })
        .collect();
    let k = k_max.min(p.m() - 1);
    if k == 0 {
        return Ok(AnalysisReport {
            beta_k: None,
            xi: vec![],
            mu: vec![],
            h1: true,
            witness: None,
            sigma_margin: None,
            global,
            gap: g.uniqueness_gap,
        });
    }
    let beta_k = match beta_k(p, k, ThresholdMode::Sharp, budget) {
        Ok(t) => Some(t.beta_k),
        Err(Error::Infeasible(_)) => None,
        Err(e) => return Err(e),
    };
    let h1 = h1_check(p.a(), k, p.tol(), budget)?;
    let sigma = sigma_k_margin(p, k, budget)?;
    Ok(AnalysisReport {
        beta_k,
        xi: h1.xi,
        mu: h1.mu,
        h1: h1.holds,
        witness: h1.witness,
        sigma_margin: Some(sigma.margin),
        global,
        gap: g.uniqueness_gap,
    })
}
