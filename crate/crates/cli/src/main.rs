//! `l0a`: exact analysis of `||A u - d||^2 + beta ||u||_0` from the command line.
//!
//! Problem inputs come either from files (`--matrix A.csv --data d.csv`, CSV or
//! JSON by extension) or from the built-in reference instance
//! (`--instance reference-5x10`, optionally `--noisy`).
//!
//! Exit codes: 0 success, 1 I/O failure or failed report check, 2 invalid
//! input, 3 combinatorial budget exceeded.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l0_analysis::experiments::{self, EnsembleKind, Table, REFERENCE_NOISE};
use l0_analysis::global_analysis::{self, ThresholdMode};
use l0_analysis::linalg::Matrix;
use l0_analysis::minimizers;
use l0_analysis::model::io;
use l0_analysis::{enumeration, Budget, Error, Problem, Support, Tolerances};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "l0a", version, about = "Exact analysis of l0-penalized least squares")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Relative pivot threshold for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rank_tol: f64,
    /// Magnitude below which a coefficient counts as zero.
    #[arg(long, global = true, default_value_t = 1e-9)]
    zero_tol: f64,
    /// Relative bound on the normal-equation residual of a minimizer.
    #[arg(long, global = true, default_value_t = 1e-8)]
    cert_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Largest number of supports a single enumeration may visit.
    #[arg(long, global = true, default_value_t = 2_000_000)]
    max_supports: u128,
    /// Largest number of support pairs a projector scan may visit.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    max_pairs: u128,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct MatrixInput {
    /// Matrix file (CSV rows or JSON object).
    #[arg(long, conflicts_with = "instance")]
    matrix: Option<PathBuf>,
    /// Built-in instance, used when no matrix file is given.
    #[arg(long, default_value = "reference-5x10")]
    instance: String,
}

#[derive(Args)]
struct ProblemInput {
    #[command(flatten)]
    matrix: MatrixInput,
    /// Data vector file; required with --matrix.
    #[arg(long, requires = "matrix")]
    data: Option<PathBuf>,
    /// Add the fixed reference perturbation to the built-in data.
    #[arg(long, conflicts_with = "data")]
    noisy: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem restricted to one support and certify the result.
    Solve {
        #[command(flatten)]
        input: ProblemInput,
        /// 1-based support, e.g. "3,5,10"; empty for the zero vector.
        #[arg(long, allow_hyphen_values = true)]
        support: String,
        #[arg(long)]
        beta: f64,
    },
    /// List every strict minimizer with at most K nonzeros.
    Enumerate {
        #[command(flatten)]
        input: ProblemInput,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        beta: f64,
    },
    /// Global minimizers with uniqueness gap and certifying quantifiers.
    Global {
        #[command(flatten)]
        input: ProblemInput,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Projector-gap quantifiers xi and mu for support sizes 1..=K.
    Xi {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Check that equal-size full-rank supports have distinct projectors.
    H1 {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Penalty above which every global minimizer has at most K nonzeros.
    BetaK {
        #[command(flatten)]
        input: ProblemInput,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Mode::Sharp)]
        mode: Mode,
    },
    /// Distance of the data from the set where candidate supports tie.
    SigmaMargin {
        #[command(flatten)]
        input: ProblemInput,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        beta: f64,
    },
    /// Regenerate a reference table or dataset into DIR/<table>/.
    Reproduce {
        #[arg(long, value_enum)]
        table: TableArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Projector-gap statistics over a seeded random ensemble.
    Ensemble {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        cols: usize,
        /// Largest support size; defaults to rows - 1.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Global minimizers over a list of penalties.
    Sweep {
        #[command(flatten)]
        input: ProblemInput,
        /// Comma-separated penalties.
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Loose,
    Sharp,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    Table3,
    Table4,
    Table5,
    Figure2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gaussian,
    Uniform,
}

/// A command result in all three output formats.
struct Output {
    text: String,
    json: Value,
    csv: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.common.format {
                Format::Text => print!("{}", out.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("json")),
                Format::Csv => print!("{}", out.csv),
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

impl Common {
    fn tolerances(&self) -> Result<Tolerances, Error> {
        let tol = Tolerances {
            rank: self.rank_tol,
            zero: self.zero_tol,
            cert: self.cert_tol,
            ..Tolerances::default()
        };
        tol.validate()?;
        Ok(tol)
    }

    fn budget(&self) -> Budget {
        Budget {
            max_supports: self.max_supports,
            max_pairs: self.max_pairs,
        }
    }
}

impl MatrixInput {
    fn load(&self) -> Result<Matrix, Error> {
        match &self.matrix {
            Some(path) => io::read_matrix(path),
            None => Ok(experiments::builtin_instance(&self.instance)?.a),
        }
    }
}

impl ProblemInput {
    fn load(&self, beta: f64, tol: Tolerances) -> Result<Problem, Error> {
        let (a, d) = match (&self.matrix.matrix, &self.data) {
            (Some(m), Some(d)) => (io::read_matrix(m)?, io::read_vector(d)?),
            (Some(_), None) => {
                return Err(Error::InvalidInput("--matrix needs --data".into()));
            }
            (None, _) => {
                let inst = experiments::builtin_instance(&self.matrix.instance)?;
                let d = if self.noisy {
                    inst.d_clean.iter().zip(REFERENCE_NOISE).map(|(c, n)| c + n).collect()
                } else {
                    inst.d_clean
                };
                (inst.a, d)
            }
        };
        Problem::new(a, d, beta)?.with_tolerances(tol)
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let tol = cli.common.tolerances()?;
    let budget = cli.common.budget();
    let out = match &cli.command {
        Command::Solve { input, support, beta } => {
            let p = input.load(*beta, tol)?;
            let omega: Support = support.parse()?;
            solve(&p, &omega)?
        }
        Command::Enumerate { input, k, beta } => {
            let p = input.load(*beta, tol)?;
            let e = enumeration::enumerate_strict_minimizers(&p, k.unwrap_or(p.m()), &budget)?;
            let mut text = format!(
                "{} strict minimizers (beta = {}, at most {} nonzeros), counts by size {:?}\n",
                e.len(),
                e.beta,
                e.k_max,
                e.counts_by_cardinality
            );
            for (i, m) in e.minimizers.iter().enumerate() {
                writeln!(text, "{:>6}  {:<20} {}", i + 1, m.support.to_string(), m.value).unwrap();
            }
            Output {
                text,
                json: json!(e),
                csv: e.to_csv_string(),
            }
        }
        Command::Global { input, beta, k } => {
            let p = input.load(*beta, tol)?;
            global(&p, k.unwrap_or(p.m()), &budget)?
        }
        Command::Xi { input, k } | Command::H1 { input, k } => {
            let a = input.load()?;
            let k = k.unwrap_or(a.rows().saturating_sub(1));
            let h = global_analysis::h1_check(&a, k, &tol, &budget)?;
            let mut text = String::new();
            if matches!(cli.command, Command::H1 { .. }) {
                writeln!(text, "holds: {}", h.holds).unwrap();
                if let Some((w, v)) = &h.witness {
                    writeln!(text, "witness: {w} and {v} span the same subspace").unwrap();
                }
            }
            writeln!(text, "{:>3}  {:>10}  {:>10}  closest pair", "k", "xi", "mu").unwrap();
            let mut csv = String::from("k,xi,mu,closest_pair\n");
            for r in 0..k {
                let pair = h.closest_pairs[r]
                    .as_ref()
                    .map(|(w, v)| format!("{w} {v}"))
                    .unwrap_or_default();
                writeln!(text, "{:>3}  {:>10.6}  {:>10.6}  {pair}", r + 1, h.xi[r], h.mu[r]).unwrap();
                writeln!(csv, "{},{:?},{:?},\"{pair}\"", r + 1, h.xi[r], h.mu[r]).unwrap();
            }
            Output {
                text,
                json: json!(h),
                csv,
            }
        }
        Command::BetaK { input, k, mode } => {
            let p = input.load(1.0, tol)?;
            let mode = match mode {
                Mode::Loose => ThresholdMode::Loose,
                Mode::Sharp => ThresholdMode::Sharp,
            };
            let t = global_analysis::beta_k(&p, *k, mode, &budget)?;
            Output {
                text: format!("beta_{} = {} (support {})\n", t.k, t.beta_k, t.support),
                csv: format!("k,mode,beta_k,support\n{},{:?},{:?},\"{}\"\n", t.k, t.mode, t.beta_k, t.support)
                    .to_lowercase(),
                json: json!(t),
            }
        }
        Command::SigmaMargin { input, k, beta } => {
            let p = input.load(*beta, tol)?;
            let s = global_analysis::sigma_k_margin(&p, *k, &budget)?;
            let pair = s
                .pair
                .as_ref()
                .map(|(w, v)| format!("{w} {v}"))
                .unwrap_or_default();
            Output {
                text: format!("margin = {} (pair {pair}, n = {})\n", s.margin, s.n),
                csv: format!("k,beta,margin,pair,n\n{},{:?},{:?},\"{pair}\",{}\n", s.k, s.beta, s.margin, s.n),
                json: json!(s),
            }
        }
        Command::Reproduce { table, out } => {
            let table = match table {
                TableArg::Table3 => Table::Table3,
                TableArg::Table4 => Table::Table4,
                TableArg::Table5 => Table::Table5,
                TableArg::Figure2 => Table::Figure2,
            };
            let r = experiments::reproduce(table, out, &tol, &budget)?;
            let mut text = r.report_text.clone();
            writeln!(text).unwrap();
            for c in &r.checks {
                let tag = match (c.passed, c.informational) {
                    (true, _) => "ok",
                    (false, true) => "no",
                    (false, false) => "FAILED",
                };
                writeln!(text, "[{tag}] {}", c.name).unwrap();
            }
            if !r.all_checks_pass() {
                eprint!("{text}");
                return Err(Failure {
                    code: 1,
                    message: format!("{} report failed a consistency check", table.name()),
                });
            }
            Output {
                text,
                json: r.report_json.clone(),
                csv: r.data_csv.clone(),
            }
        }
        Command::Ensemble { kind, count, seed, rows, cols, k } => {
            let kind = match kind {
                Kind::Gaussian => EnsembleKind::Gaussian,
                Kind::Uniform => EnsembleKind::Uniform,
            };
            let mats = experiments::random_ensemble(kind, *count, (*rows, *cols), *seed)?;
            let k = k.unwrap_or(rows - 1);
            let s = global_analysis::ensemble_stats(&mats, k, &tol, &budget)?;
            let mut text = format!("{count} matrices, H1 holds on all: {}\n", s.all_hold);
            writeln!(text, "{:>3}  {:>10}  {:>10}", "k", "worst xi", "best xi").unwrap();
            let mut csv = String::from("k,xi_worst,xi_best\n");
            for r in 0..k {
                writeln!(text, "{:>3}  {:>10.6}  {:>10.6}", r + 1, s.xi_worst[r], s.xi_best[r]).unwrap();
                writeln!(csv, "{},{:?},{:?}", r + 1, s.xi_worst[r], s.xi_best[r]).unwrap();
            }
            for (j, rate) in s.tie_rates.iter().enumerate() {
                writeln!(text, "xi_{} = xi_{}: {:.1}%", j + 1, j + 2, 100.0 * rate).unwrap();
            }
            writeln!(text, "strict decrease violated: {:.1}%", 100.0 * s.violation_rate).unwrap();
            Output {
                text,
                json: json!(s),
                csv,
            }
        }
        Command::Sweep { input, betas, k } => {
            let p = input.load(betas.first().copied().unwrap_or(1.0), tol)?;
            let reports = experiments::sweep(&p, betas, k.unwrap_or(p.m()), &budget)?;
            let mut text = String::new();
            let mut csv = String::from("beta,support,cardinality,objective,gap\n");
            for g in &reports {
                let m = &g.minimizers[0];
                let gap = g.uniqueness_gap.map_or(String::new(), |x| format!("{x:?}"));
                writeln!(text, "{:>12}  {:<20} {:>14.6}  gap {gap}", g.beta, m.support.to_string(), m.value).unwrap();
                writeln!(csv, "{:?},\"{}\",{},{:?},{gap}", g.beta, m.support, m.cardinality(), m.value).unwrap();
            }
            Output {
                text,
                json: json!(reports),
                csv,
            }
        }
    };
    Ok(out)
}

fn solve(p: &Problem, omega: &Support) -> Result<Output, Error> {
    let m = minimizers::solve_restricted(p, omega)?;
    let residual = minimizers::normal_equation_residual(p, &m.u);
    let local = minimizers::is_local_minimizer(p, &m.u);
    let coordinatewise = minimizers::coordinatewise_check(p, &m.u).passes;
    let margin = minimizers::necessary_condition_margin(p, &m.u);
    let mut text = String::new();
    writeln!(text, "support:  {}", m.support).unwrap();
    writeln!(text, "values:   {:?}", m.nonzeros()).unwrap();
    writeln!(text, "F(u):     {}", m.value).unwrap();
    writeln!(text, "strict:   {}", m.is_strict).unwrap();
    writeln!(text, "shrunk:   {}", m.shrunk).unwrap();
    writeln!(text, "normal-equation residual: {residual:e} (local minimizer: {local})").unwrap();
    writeln!(text, "coordinate-wise optimal:  {coordinatewise}").unwrap();
    if m.support.is_empty() {
        writeln!(text, "necessary margin: n/a").unwrap();
    } else {
        writeln!(text, "necessary margin: {margin}").unwrap();
    }
    let csv = io::vector_to_csv(&m.u);
    let json = json!({
        "minimizer": m,
        "normal_equation_residual": residual,
        "local": local,
        "coordinatewise": coordinatewise,
        "necessary_margin": (!m.support.is_empty()).then_some(margin),
    });
    Ok(Output { text, json, csv })
}

fn global(p: &Problem, k_max: usize, budget: &Budget) -> Result<Output, Error> {
    let r = global_analysis::analyze(p, k_max, budget)?;
    let mut text = String::new();
    for g in &r.global {
        writeln!(text, "global minimizer: {} values {:?}  F = {}", g.support, g.values, g.objective).unwrap();
    }
    match r.gap {
        Some(gap) => writeln!(text, "uniqueness gap: {gap}").unwrap(),
        None => writeln!(text, "uniqueness gap: n/a (single candidate)").unwrap(),
    }
    if r.global.len() > 1 {
        writeln!(text, "numerically tied: {} minimizers", r.global.len()).unwrap();
    }
    if !r.xi.is_empty() {
        let k = r.xi.len();
        match r.beta_k {
            Some(b) => writeln!(text, "beta_{k} (sharp): {b}").unwrap(),
            None => writeln!(text, "beta_{k} (sharp): infeasible").unwrap(),
        }
        writeln!(text, "xi: {:?}", r.xi).unwrap();
        writeln!(text, "mu: {:?}", r.mu).unwrap();
        writeln!(text, "H1: {}", r.h1).unwrap();
        if let Some(s) = r.sigma_margin {
            writeln!(text, "sigma margin: {s}").unwrap();
        }
    }
    let mut csv = String::from("support,values,objective\n");
    for g in &r.global {
        let values: Vec<String> = g.values.iter().map(|x| format!("{x:?}")).collect();
        writeln!(csv, "\"{}\",\"{}\",{:?}", g.support, values.join(" "), g.objective).unwrap();
    }
    Ok(Output {
        text,
        json: json!(r),
        csv,
    })
}
