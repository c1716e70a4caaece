//! The reference 5x10 instance, random ensembles, penalty sweeps and
//! reproducible report pipelines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::enumeration::enumerate_strict_minimizers;
use crate::error::{Error, Result};
use crate::global_analysis::{global_from_enumeration, global_minimizers, h1_check, neighbour_scan_upper_bounds, GlobalReport};
use crate::linalg::{dot, Matrix};
use crate::model::{io, support_of, Budget, Problem, Support, Tolerances};

const REFERENCE_ROWS: [[f64; 10]; 5] = [
    [7.0, 2.0, 4.0, 9.0, 0.0, 3.0, 3.0, 6.0, 6.0, 7.0],
    [3.0, 4.0, 9.0, 3.0, 3.0, 9.0, 1.0, 3.0, 1.0, 5.0],
    [5.0, 4.0, 2.0, 4.0, 0.0, 7.0, 1.0, 9.0, 2.0, 9.0],
    [8.0, 4.0, 0.0, 9.0, 6.0, 0.0, 4.0, 2.0, 3.0, 7.0],
    [6.0, 3.0, 6.0, 5.0, 0.0, 9.0, 0.0, 0.0, 3.0, 8.0],
];
const REFERENCE_ORIGINAL: [f64; 10] = [0.0, 1.0, 8.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 9.0];

/// Fixed perturbation added to the clean reference data.
pub const REFERENCE_NOISE: [f64; 5] = [4.0, -1.0, 2.0, -3.0, 5.0];

/// Penalties swept by the table pipelines.
pub const TABLE_BETAS: [f64; 5] = [1.0, 1e2, 1e3, 1e4, 7e4];

/// A built-in instance: matrix, sparse original and its noise-free image.
#[derive(Clone, Debug)]
pub struct BuiltinInstance {
    pub a: Matrix,
    pub u_true: Vec<f64>,
    pub d_clean: Vec<f64>,
}

pub fn builtin_instance(name: &str) -> Result<BuiltinInstance> {
    match name {
        "reference-5x10" => {
            let a = Matrix::from_rows(&REFERENCE_ROWS)?;
            let u_true = REFERENCE_ORIGINAL.to_vec();
            let d_clean = a.matvec(&u_true);
            Ok(BuiltinInstance { a, u_true, d_clean })
        }
        other => Err(Error::invalid(format!(
            "unknown built-in instance {other:?} (available: reference-5x10)"
        ))),
    }
}

pub fn clean_reference_problem(beta: f64) -> Result<Problem> {
    let inst = builtin_instance("reference-5x10")?;
    Problem::new(inst.a, inst.d_clean, beta)
}

pub fn noisy_reference_problem(beta: f64) -> Result<Problem> {
    let inst = builtin_instance("reference-5x10")?;
    let d = NoiseSpec::Explicit(REFERENCE_NOISE.to_vec()).apply(&inst.d_clean)?;
    Problem::new(inst.a, d, beta)
}

/// How to perturb clean data.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    Explicit(Vec<f64>),
    Gaussian { sigma: f64, seed: u64 },
    Uniform { half_width: f64, seed: u64 },
}

impl NoiseSpec {
    pub fn realize(&self, m: usize) -> Result<Vec<f64>> {
        match self {
            NoiseSpec::Explicit(v) => {
                if v.len() != m {
                    return Err(Error::invalid(format!(
                        "noise has length {}, data has {m}",
                        v.len()
                    )));
                }
                Ok(v.clone())
            }
            NoiseSpec::Gaussian { sigma, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..m)
                    .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect())
            }
            NoiseSpec::Uniform { half_width, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..m)
                    .map(|_| rng.random_range(-*half_width..=*half_width))
                    .collect())
            }
        }
    }

    pub fn apply(&self, clean: &[f64]) -> Result<Vec<f64>> {
        let n = self.realize(clean.len())?;
        Ok(clean.iter().zip(n).map(|(c, e)| c + e).collect())
    }
}

/// `10 log10( sum (clean - mean(clean))^2 / sum (noisy - clean)^2 )`.
///
/// Zero noise gives `+inf`; a constant clean signal with nonzero noise gives `-inf`.
pub fn snr_db(clean: &[f64], noisy: &[f64]) -> Result<f64> {
    if clean.len() != noisy.len() || clean.is_empty() {
        return Err(Error::invalid("signals must have the same nonzero length"));
    }
    let mean = clean.iter().sum::<f64>() / clean.len() as f64;
    let signal: f64 = clean.iter().map(|c| (c - mean).powi(2)).sum();
    let noise: f64 = clean.iter().zip(noisy).map(|(c, n)| (n - c).powi(2)).sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    if signal == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Independent standard normal entries.
    Gaussian,
    /// Independent entries uniform on `[-1, 1]`.
    Uniform,
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "uniform" => Ok(EnsembleKind::Uniform),
            other => Err(Error::invalid(format!("unknown ensemble kind {other:?}"))),
        }
    }
}

/// `count` random `m x n` matrices drawn from one seeded stream.
pub fn random_ensemble(
    kind: EnsembleKind,
    count: usize,
    (m, n): (usize, usize),
    seed: u64,
) -> Result<Vec<Matrix>> {
    if count == 0 {
        return Err(Error::invalid("ensemble size must be at least 1"));
    }
    if m == 0 || m >= n {
        return Err(Error::invalid(format!(
            "ensemble shape must satisfy 0 < M < N, got {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let entries = (0..m * n)
                .map(|_| match kind {
                    EnsembleKind::Gaussian => StandardNormal.sample(&mut rng),
                    EnsembleKind::Uniform => rng.random_range(-1.0..=1.0),
                })
                .collect();
            Matrix::new(m, n, entries)
        })
        .collect()
}

/// Where an experiment's problem comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    Builtin { name: String, noise: Option<NoiseSpec> },
    Files { matrix: PathBuf, data: PathBuf },
}

/// Settings for a penalty sweep or report run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub beta_list: Vec<f64>,
    pub k: usize,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub budget: Budget,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta_list.is_empty() {
            return Err(Error::invalid("at least one beta is required"));
        }
        if let Some(b) = self.beta_list.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::invalid(format!("beta must be positive, got {b}")));
        }
        if let InstanceSource::Builtin {
            noise: Some(NoiseSpec::Gaussian { .. } | NoiseSpec::Uniform { .. }),
            ..
        } = &self.instance
        {
            if self.seed.is_none() {
                return Err(Error::invalid("random noise needs a seed"));
            }
        }
        self.tolerances.validate()
    }

    /// The configured problem at the first penalty of the list.
    pub fn problem(&self) -> Result<Problem> {
        self.validate()?;
        let beta = self.beta_list[0];
        let p = match &self.instance {
            InstanceSource::Builtin { name, noise } => {
                let inst = builtin_instance(name)?;
                let d = match noise {
                    Some(n) => n.apply(&inst.d_clean)?,
                    None => inst.d_clean,
                };
                Problem::new(inst.a, d, beta)?
            }
            InstanceSource::Files { matrix, data } => {
                Problem::new(io::read_matrix(matrix)?, io::read_vector(data)?, beta)?
            }
        };
        p.with_tolerances(self.tolerances)
    }
}

/// Global minimizers for each penalty of the configuration, in list order.
pub fn beta_sweep(config: &ExperimentConfig) -> Result<Vec<GlobalReport>> {
    let p = config.problem()?;
    sweep(&p, &config.beta_list, config.k, &config.budget)
}

pub fn sweep(p: &Problem, betas: &[f64], k_max: usize, budget: &Budget) -> Result<Vec<GlobalReport>> {
    betas
        .par_iter()
        .map(|&b| global_minimizers(&p.with_beta(b)?, k_max, budget))
        .collect()
}

/// Report pipelines for the reference instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    /// Projector-gap quantifiers of the reference matrix.
    Table3,
    /// Penalty sweep on clean data.
    Table4,
    /// Penalty sweep on noisy data.
    Table5,
    /// Every strict minimizer of the noisy problem at `beta = 100`.
    Figure2,
}

impl Table {
    pub fn name(self) -> &'static str {
        match self {
            Table::Table3 => "table3",
            Table::Table4 => "table4",
            Table::Table5 => "table5",
            Table::Figure2 => "figure2",
        }
    }
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table3" => Ok(Table::Table3),
            "table4" => Ok(Table::Table4),
            "table5" => Ok(Table::Table5),
            "figure2" => Ok(Table::Figure2),
            other => Err(Error::invalid(format!(
                "unknown table {other:?} (expected table3, table4, table5 or figure2)"
            ))),
        }
    }
}

/// A consistency check performed while building a report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Recorded for information only; does not fail the report.
    pub informational: bool,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            passed,
            informational: false,
        }
    }

    fn note(name: impl Into<String>, passed: bool) -> Self {
        Check {
            informational: true,
            ..Check::new(name, passed)
        }
    }
}

/// Contents of one report directory.
#[derive(Clone, Debug)]
pub struct Reproduction {
    pub table: Table,
    pub report_text: String,
    pub data_csv: String,
    pub report_json: serde_json::Value,
    pub checks: Vec<Check>,
}

impl Reproduction {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    /// Write `report.txt`, `data.csv` and `report.json` into `out/<table>/`.
    pub fn write_to(&self, out: &Path) -> Result<PathBuf> {
        let dir = out.join(self.table.name());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let json = serde_json::to_string_pretty(&self.report_json).expect("json value") + "\n";
        for (name, body) in [
            ("report.txt", self.report_text.as_str()),
            ("data.csv", self.data_csv.as_str()),
            ("report.json", json.as_str()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(dir)
    }
}

/// Run a report pipeline and write its files under `out`.
pub fn reproduce(table: Table, out: &Path, tol: &Tolerances, budget: &Budget) -> Result<Reproduction> {
    let r = build_reproduction(table, tol, budget)?;
    r.write_to(out)?;
    Ok(r)
}

/// Run a report pipeline without touching the filesystem.
pub fn build_reproduction(table: Table, tol: &Tolerances, budget: &Budget) -> Result<Reproduction> {
    match table {
        Table::Table3 => projector_gap_report(tol, budget),
        Table::Table4 => sweep_report(Table::Table4, clean_reference_problem(1.0)?, tol, budget),
        Table::Table5 => sweep_report(Table::Table5, noisy_reference_problem(1.0)?, tol, budget),
        Table::Figure2 => landscape_report(tol, budget),
    }
}

fn projector_gap_report(tol: &Tolerances, budget: &Budget) -> Result<Reproduction> {
    let a = builtin_instance("reference-5x10")?.a;
    let k = a.rows() - 1;
    let h1 = h1_check(&a, k, tol, budget)?;
    let bounds = neighbour_scan_upper_bounds(&a, k, tol)?;

    let mut text = String::new();
    writeln!(text, "Projector gaps of the reference 5x10 matrix (exhaustive pair scan)").unwrap();
    writeln!(text).unwrap();
    write!(text, "{:<26}", "").unwrap();
    for r in 1..=k {
        write!(text, "  k={r:<7}").unwrap();
    }
    writeln!(text).unwrap();
    for (label, row) in [
        ("xi_k(A)", &h1.xi),
        ("mu_k(A)", &h1.mu),
        ("neighbour-scan bound", &bounds),
    ] {
        write!(text, "{label:<26}").unwrap();
        for x in row.iter() {
            write!(text, "  {x:<9.4}").unwrap();
        }
        writeln!(text).unwrap();
    }
    writeln!(text).unwrap();
    for (r, pair) in h1.closest_pairs.iter().enumerate() {
        if let Some((w, v)) = pair {
            writeln!(text, "closest pair, size {}: {w} vs {v}", r + 1).unwrap();
        }
    }
    writeln!(text, "distinct projectors for every size <= {k}: {}", h1.holds).unwrap();

    let mut csv = String::from("k,xi,mu,neighbour_scan_bound,closest_pair\n");
    for r in 0..k {
        let pair = h1.closest_pairs[r]
            .as_ref()
            .map(|(w, v)| format!("{w} {v}"))
            .unwrap_or_default();
        writeln!(
            csv,
            "{},{:?},{:?},{:?},\"{pair}\"",
            r + 1,
            h1.xi[r],
            h1.mu[r],
            bounds[r]
        )
        .unwrap();
    }

    let xi_monotone = h1.xi.windows(2).all(|w| w[0] >= w[1]);
    let checks = vec![
        Check::new("distinct projectors for every size <= M-1", h1.holds),
        Check::new("xi nonincreasing", xi_monotone),
        Check::new(
            "neighbour scan bounds mu from above",
            bounds.iter().zip(&h1.mu).all(|(b, m)| b >= m),
        ),
    ];
    let json = json!({
        "table": "table3",
        "k": k,
        "h1": h1.holds,
        "witness": h1.witness,
        "xi": h1.xi,
        "mu": h1.mu,
        "closest_pairs": h1.closest_pairs,
        "neighbour_scan_bounds": bounds,
        "checks": checks,
    });
    Ok(Reproduction {
        table: Table::Table3,
        report_text: text,
        data_csv: csv,
        report_json: json,
        checks,
    })
}

fn sweep_report(table: Table, p: Problem, tol: &Tolerances, budget: &Budget) -> Result<Reproduction> {
    let p = p.with_tolerances(*tol)?;
    let inst = builtin_instance("reference-5x10")?;
    let original = support_of(&inst.u_true, tol.zero);
    let k_max = p.m();
    let reports = sweep(&p, &TABLE_BETAS, k_max, budget)?;
    let snr = snr_db(&inst.d_clean, p.d())?;
    let noisy = table == Table::Table5;

    let mut text = String::new();
    writeln!(
        text,
        "Global minimizer of the reference problem, {} data d = {:?}",
        if noisy { "noisy" } else { "noise-free" },
        p.d()
    )
    .unwrap();
    if noisy {
        writeln!(text, "SNR = {snr:.2} dB").unwrap();
    }
    writeln!(text).unwrap();
    writeln!(text, "{:>8} | {:<70} | {:>5} | {:>10} | {:>10}", "beta", "u (row vector)", "||u||0", "F(u)", "gap").unwrap();
    let mut csv = String::from("beta,support,cardinality,objective,uniqueness_gap");
    for i in 1..=p.n() {
        write!(csv, ",u{i}").unwrap();
    }
    csv.push('\n');

    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for g in &reports {
        let best = &g.minimizers[0];
        let entries: Vec<String> = best
            .u
            .iter()
            .map(|&x| if x.abs() <= tol.zero { "0".into() } else { format!("{x:.2}") })
            .collect();
        writeln!(
            text,
            "{:>8} | {:<70} | {:>5} | {:>10} | {:>10}",
            g.beta,
            entries.join(" "),
            best.cardinality(),
            significant(best.value, 5),
            g.uniqueness_gap.map_or("-".into(), |x| format!("{x:.4}")),
        )
        .unwrap();
        write!(
            csv,
            "{:?},\"{}\",{},{:?},{}",
            g.beta,
            best.support,
            best.cardinality(),
            best.value,
            g.uniqueness_gap.map_or(String::new(), |x| format!("{x:?}"))
        )
        .unwrap();
        for x in &best.u {
            write!(csv, ",{x:?}").unwrap();
        }
        csv.push('\n');

        checks.push(Check::new(
            format!("beta={}: unique global minimizer", g.beta),
            g.unique().is_some(),
        ));
        checks.push(Check::new(
            format!("beta={}: necessary coordinate bound", g.beta),
            g.necessary_margins.iter().all(|&m| m >= -tol.value),
        ));
        if [1e2, 1e3, 1e4].contains(&g.beta) {
            // A heuristic only: the clean beta = 1e3 minimizer leaves the original support.
            checks.push(Check::note(
                format!("beta={}: support within the original support", g.beta),
                best.support.is_subset_of(&original),
            ));
        }
        if g.beta > p.data_energy() {
            checks.push(Check::new(
                format!("beta={}: zero minimizer above ||d||^2", g.beta),
                best.support.is_empty(),
            ));
        }
        rows.push(json!({
            "beta": g.beta,
            "support": best.support,
            "values": best.nonzeros(),
            "u": best.u,
            "objective": best.value,
            "gap": g.uniqueness_gap,
        }));
    }
    let original_row: Vec<String> = inst.u_true.iter().map(|x| format!("{x}")).collect();
    writeln!(text, "{:>8} | {}", "original", original_row.join(" ")).unwrap();

    let json = json!({
        "table": table.name(),
        "data": p.d(),
        "snr_db": if noisy { Some(snr) } else { None },
        "global": rows,
        "checks": checks,
    });
    Ok(Reproduction {
        table,
        report_text: text,
        data_csv: csv,
        report_json: json,
        checks,
    })
}

fn landscape_report(tol: &Tolerances, budget: &Budget) -> Result<Reproduction> {
    let p = noisy_reference_problem(100.0)?.with_tolerances(*tol)?;
    let e = enumerate_strict_minimizers(&p, p.m(), budget)?;
    let g = global_from_enumeration(&p, &e);
    let m = p.m();
    let beta_m = p.beta() * m as f64;
    let full = e
        .minimizers
        .iter()
        .filter(|x| x.cardinality() == m)
        .collect::<Vec<_>>();
    let full_at_beta_m = full
        .iter()
        .filter(|x| (x.value - beta_m).abs() <= 1e-6)
        .count();
    let zero_value = e
        .minimizers
        .iter()
        .find(|x| x.support.is_empty())
        .map(|x| x.value)
        .unwrap_or(f64::NAN);
    let energy = dot(p.d(), p.d());

    let mut text = String::new();
    writeln!(text, "All strict minimizers of the noisy reference problem, beta = {}", p.beta()).unwrap();
    writeln!(text).unwrap();
    writeln!(text, "distinct strict minimizers: {}", e.len()).unwrap();
    writeln!(text, "by cardinality: {:?}", e.counts_by_cardinality).unwrap();
    writeln!(text, "cardinality {m} with F = beta*M = {beta_m}: {full_at_beta_m} of {}", full.len()).unwrap();
    writeln!(
        text,
        "global minimizer: {} with F = {}",
        g.minimizers[0].support,
        significant(g.best_value, 5)
    )
    .unwrap();
    writeln!(
        text,
        "uniqueness gap: {}",
        g.uniqueness_gap.map_or("-".into(), |x| format!("{x:.4}"))
    )
    .unwrap();
    writeln!(text, "F(0) = {zero_value} (||d||^2 = {energy})").unwrap();

    let checks = vec![
        Check::new("F(0) equals ||d||^2", zero_value == energy),
        Check::new(
            "every full-size minimizer has F = beta*M",
            full_at_beta_m == full.len(),
        ),
        Check::new("unique global minimizer", g.unique().is_some()),
        Check::new(
            "values sorted",
            e.values().collect::<Vec<_>>().windows(2).all(|w| w[0] <= w[1]),
        ),
    ];
    let json = json!({
        "table": "figure2",
        "beta": p.beta(),
        "count": e.len(),
        "counts_by_cardinality": e.counts_by_cardinality,
        "full_size_at_beta_m": full_at_beta_m,
        "global": g.minimizers.iter().map(|x| json!({
            "support": x.support,
            "values": x.nonzeros(),
            "objective": x.value,
        })).collect::<Vec<_>>(),
        "gap": g.uniqueness_gap,
        "zero_objective": zero_value,
        "checks": checks,
    });
    Ok(Reproduction {
        table: Table::Figure2,
        report_text: text,
        data_csv: e.to_csv_string(),
        report_json: json,
        checks,
    })
}

/// `x` rounded to `digits` significant digits, printed without exponent.
pub fn significant(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Support `omega` as a 1-based list, e.g. for CLI output.
pub fn support_label(omega: &Support) -> String {
    omega.to_string()
}
