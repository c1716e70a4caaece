//! Exhaustive enumeration of supports and strict minimizers.

use std::collections::BTreeMap;
use std::io::Write;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::minimizers::solve_restricted;
use crate::model::{Budget, CertifiedMinimizer, Problem, Support, Tolerances};

/// `C(n, k)` without overflow for the sizes of interest.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of supports of size at most `k_max` among `n` columns.
pub fn supports_up_to(n: usize, k_max: usize) -> u128 {
    (0..=k_max).map(|r| binomial(n, r)).sum()
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> impl Iterator<Item = Support> {
    (0..n)
        .combinations(r)
        .map(Support::from_sorted_unchecked)
}

/// `r`-subsets whose columns are linearly independent, in lexicographic order.
pub fn full_rank_supports(a: &Matrix, r: usize, tol: &Tolerances) -> Vec<Support> {
    let candidates: Vec<Support> = subsets(a.cols(), r).collect();
    candidates
        .into_par_iter()
        .filter(|w| {
            linalg::numerical_rank(&a.select_columns(w.indices()), tol.rank)
                .is_ok_and(|rank| rank == r)
        })
        .collect()
}

/// Full-column-rank supports grouped by size: `by_cardinality[r]` lists the
/// `r`-subsets `w` with `rank(A_w) = r`.
#[derive(Clone, Debug, Serialize)]
pub struct SupportFamily {
    pub n: usize,
    pub by_cardinality: Vec<Vec<Support>>,
}

impl SupportFamily {
    pub fn counts(&self) -> Vec<usize> {
        self.by_cardinality.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.by_cardinality.iter().map(Vec::len).sum()
    }

    /// All supports, by increasing size, lexicographic within a size.
    pub fn iter(&self) -> impl Iterator<Item = &Support> {
        self.by_cardinality.iter().flatten()
    }
}

pub fn build_support_family(
    a: &Matrix,
    k_max: usize,
    tol: &Tolerances,
    budget: &Budget,
) -> Result<SupportFamily> {
    if k_max > a.rows() {
        return Err(Error::invalid(format!(
            "k_max = {k_max} exceeds the {} rows",
            a.rows()
        )));
    }
    budget.check_supports(supports_up_to(a.cols(), k_max))?;
    let by_cardinality = (0..=k_max)
        .map(|r| full_rank_supports(a, r, tol))
        .collect();
    Ok(SupportFamily {
        n: a.cols(),
        by_cardinality,
    })
}

/// All distinct strict minimizers with support size at most `k_max`, sorted by
/// objective value, ties broken lexicographically on the support.
#[derive(Clone, Debug, Serialize)]
pub struct EnumerationResult {
    pub beta: f64,
    pub k_max: usize,
    pub minimizers: Vec<CertifiedMinimizer>,
    /// `counts_by_cardinality[r]` = number of minimizers with `r` nonzeros.
    pub counts_by_cardinality: Vec<usize>,
    /// Number of supports that were solved.
    pub supports_visited: usize,
}

impl EnumerationResult {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.minimizers.iter().map(|m| m.value)
    }

    pub fn len(&self) -> usize {
        self.minimizers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minimizers.is_empty()
    }

    /// Plot-ready table: `rank_in_sorted_order,support,cardinality,objective_value`
    /// with 1-based ranks and supports.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::invalid(format!("csv output: {e}"));
        w.write_record(["rank_in_sorted_order", "support", "cardinality", "objective_value"])
            .map_err(io)?;
        for (k, m) in self.minimizers.iter().enumerate() {
            w.write_record([
                (k + 1).to_string(),
                m.support.to_string(),
                m.cardinality().to_string(),
                format!("{:?}", m.value),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Solve the restricted problem on every full-rank support of size at most
/// `k_max` and collect the distinct minimizers.
///
/// A solution whose support shrank is attributed to its actual support; two
/// supports yielding the same minimizer collapse into one entry.
pub fn enumerate_strict_minimizers(
    p: &Problem,
    k_max: usize,
    budget: &Budget,
) -> Result<EnumerationResult> {
    let family = build_support_family(p.a(), k_max, p.tol(), budget)?;
    let supports: Vec<&Support> = family.iter().collect();
    let solved: Vec<CertifiedMinimizer> = supports
        .par_iter()
        .map(|w| solve_restricted(p, w))
        .collect::<Result<_>>()?;

    let mut by_support: BTreeMap<Support, CertifiedMinimizer> = BTreeMap::new();
    for m in solved {
        debug_assert!(m.is_strict, "full-rank support gave a nonstrict minimizer");
        by_support.entry(m.support.clone()).or_insert(m);
    }
    let mut minimizers: Vec<CertifiedMinimizer> = by_support.into_values().collect();
    minimizers.sort_by(|x, y| {
        x.value
            .total_cmp(&y.value)
            .then_with(|| x.support.cmp(&y.support))
    });

    let mut counts_by_cardinality = vec![0; k_max + 1];
    for m in &minimizers {
        counts_by_cardinality[m.cardinality()] += 1;
    }
    Ok(EnumerationResult {
        beta: p.beta(),
        k_max,
        minimizers,
        counts_by_cardinality,
        supports_visited: supports.len(),
    })
}
