//! `mdlquad` command line.
//!
//! Exit codes: 0 success, 2 invalid arguments or input files, 3 eigensolver
//! failure, 4 unknown summand, 5 reference series did not converge.

mod builtin;
mod rulefile;

use std::cmp::Ordering;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use builtin::{Builtin, BuiltinError};
pub use rulefile::{fmt17, MeasureRecord, RuleFileError, RuleFileRecord, RuleRow, SCHEMA_VERSION};

use crate::error::Error;
use crate::measure::{Flavor, MeasureSpec};
use crate::quadrature::build_rule;
use crate::summation::{convergence_study, root_trajectory, Execution, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "mdlquad",
    version,
    about = "Gaussian summation rules for exponentially decaying lattice sums"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the nodes and weights of an N-point rule.
    Rule(RuleArgs),
    /// Estimate one lattice sum and compare it with a brute-force reference.
    Sum(SumArgs),
    /// Error versus N for several strategies.
    Converge(ConvergeArgs),
    /// Node positions of the bosonic rule across a grid of h*s.
    Roots(RootsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    /// Table values are F(x_k).
    Full,
    /// Table values are f(x_k) = F(x_k) e^{s x_k}.
    Smooth,
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "bosonic")]
    pub flavor: Flavor,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    /// Builtin summand, e.g. `cosexp:1,1.6`.
    #[arg(long, required_unless_present = "table", conflicts_with = "table")]
    pub summand: Option<String>,
    /// CSV with columns `node,value` holding the summand at the rule nodes.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full", requires = "table")]
    pub convention: Convention,
    #[arg(long)]
    pub h: f64,
    /// Decay rate of the rule; defaults to the builtin summand's own rate.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "mdl")]
    pub strategy: String,
    #[arg(long, default_value = "bosonic")]
    pub flavor: Flavor,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub summand: String,
    /// Comma-separated list such as `mdl:0.8,mdl:1.6,naive`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub strategies: Vec<Strategy>,
    /// Orders as an inclusive range `1..20` or a list `4,8,16`.
    #[arg(long, default_value = "1..20")]
    pub n: String,
    #[arg(long)]
    pub h: f64,
    /// Nominal decay rate of the lattice measure; defaults to the summand's own rate
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value = "bosonic")]
    pub flavor: Flavor,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 0.05)]
    pub hs_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub hs_max: f64,
    #[arg(long, default_value_t = 80)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command together with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Eigen(String),
    #[error(transparent)]
    UnknownSummand(BuiltinError),
    #[error("{0}")]
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Eigen(_) => 3,
            CliError::UnknownSummand(_) => 4,
            CliError::Oracle(_) => 5,
        }
    }

    fn from_core(err: Error, order: usize, hs: f64) -> Self {
        match err {
            Error::EigenNonConvergence { .. }
            | Error::NodeOrdering { .. }
            | Error::IllConditioned { .. } => CliError::Eigen(format!(
                "rule construction failed for N={order}, hs={hs}: {err}"
            )),
            Error::SeriesNonConvergence { .. } => {
                CliError::Oracle(format!("reference sum failed: {err}"))
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<BuiltinError> for CliError {
    fn from(err: BuiltinError) -> Self {
        match err {
            BuiltinError::Unknown(_) => CliError::UnknownSummand(err),
            BuiltinError::BadParams { .. } => CliError::Usage(err.to_string()),
        }
    }
}

/// Parse `args` (including the program name), run, and map the outcome to
/// an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(err.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Rule(args) => {
            let text = rule_text(args)?;
            emit(args.out.as_deref(), &text)
        }
        Command::Sum(args) => {
            let text = sum_text(args)?;
            emit(None, &text)
        }
        Command::Converge(args) => {
            let text = converge_text(args)?;
            emit(args.out.as_deref(), &text)
        }
        Command::Roots(args) => {
            let text = roots_text(args)?;
            emit(args.out.as_deref(), &text)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn measure(h: f64, s: f64, flavor: Flavor) -> Result<MeasureSpec, CliError> {
    MeasureSpec::new(h, s, flavor).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn rule_text(args: &RuleArgs) -> Result<String, CliError> {
    let m = measure(args.h, args.s, args.flavor)?;
    let rule = build_rule(args.n, &m).map_err(|e| CliError::from_core(e, args.n, m.hs()))?;
    let record = RuleFileRecord::from_rule(&rule, &m);
    Ok(match args.format {
        Format::Csv => record.to_csv(),
        Format::Json => record.to_json(),
    })
}

#[derive(Debug, Serialize)]
struct SumOutput {
    schema_version: u32,
    summand: String,
    strategy: String,
    flavor: Flavor,
    #[serde(serialize_with = "rulefile::ser17_plain")]
    h: f64,
    #[serde(serialize_with = "rulefile::ser17_plain")]
    s: f64,
    n: usize,
    #[serde(serialize_with = "rulefile::ser17_plain")]
    estimate: f64,
    #[serde(serialize_with = "rulefile::ser17_opt")]
    reference: Option<f64>,
    #[serde(serialize_with = "rulefile::ser17_opt")]
    abs_error: Option<f64>,
    #[serde(serialize_with = "rulefile::ser17_opt")]
    rel_error: Option<f64>,
    evaluations: usize,
}

impl SumOutput {
    fn to_text(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("sum output serializes");
        text.push('\n');
        text
    }
}

fn parse_strategy(text: &str, s: f64) -> Result<Strategy, CliError> {
    if text.trim() == "mdl" {
        return Ok(Strategy::Mdl { s });
    }
    text.parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))
}

pub fn sum_text(args: &SumArgs) -> Result<String, CliError> {
    if let Some(path) = &args.table {
        return table_sum_text(args, path);
    }
    let spec = args.summand.as_deref().unwrap_or_default();
    let builtin = Builtin::parse(spec)?;
    let s = args.s.unwrap_or(builtin.decay());
    let m = measure(args.h, s, args.flavor)?;
    let strategy = parse_strategy(&args.strategy, s)?;
    let hs = match strategy {
        Strategy::Mdl { s } => s * args.h,
        Strategy::Naive => m.hs(),
    };
    let report = convergence_study(
        &builtin.summand(),
        &m,
        &[args.n],
        &[strategy],
        Execution::Sequential,
    )
    .map_err(|e| CliError::from_core(e, args.n, hs))?;
    let report = &report[0];
    let row = report.rows[0];
    let rel_error = (report.reference != 0.0).then(|| row.abs_error / report.reference.abs());
    Ok(SumOutput {
        schema_version: SCHEMA_VERSION,
        summand: spec.trim().to_string(),
        strategy: strategy.to_string(),
        flavor: args.flavor,
        h: args.h,
        s,
        n: args.n,
        estimate: row.estimate,
        reference: Some(report.reference),
        abs_error: Some(row.abs_error),
        rel_error,
        evaluations: row.evaluations,
    }
    .to_text())
}

#[derive(Debug, serde::Deserialize)]
struct TableRow {
    node: f64,
    value: f64,
}

const TABLE_NODE_RTOL: f64 = 1e-13;

fn table_sum_text(args: &SumArgs, path: &Path) -> Result<String, CliError> {
    let s = args
        .s
        .ok_or_else(|| CliError::Usage("--s is required with --table".into()))?;
    if args.strategy.trim() != "mdl" && args.strategy.trim() != format!("mdl:{s}") {
        return Err(CliError::Usage(
            "tabulated summands only support the mdl strategy".into(),
        ));
    }
    let m = measure(args.h, s, args.flavor)?;
    let rule = build_rule(args.n, &m).map_err(|e| CliError::from_core(e, args.n, m.hs()))?;

    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows = reader
        .deserialize()
        .collect::<Result<Vec<TableRow>, _>>()
        .map_err(|e| CliError::Usage(format!("bad table {}: {e}", path.display())))?;
    if rows.len() != rule.order() {
        return Err(CliError::Usage(format!(
            "table has {} rows but the rule has {} nodes",
            rows.len(),
            rule.order()
        )));
    }
    for (k, (row, &x)) in rows.iter().zip(rule.nodes()).enumerate() {
        if (row.node - x)
            .abs()
            .partial_cmp(&(TABLE_NODE_RTOL * x.abs()))
            == Some(Ordering::Greater)
            || row.node.is_nan()
        {
            return Err(CliError::Usage(format!(
                "table node {k} is {} but the rule node is {}; tabulated values are not interpolated",
                fmt17(row.node),
                fmt17(x)
            )));
        }
    }
    let estimate =
        crate::compensated::compensated_sum(rule.iter().zip(&rows).map(|((x, w), row)| {
            match args.convention {
                Convention::Full => w * row.value * (s * x).exp(),
                Convention::Smooth => w * row.value,
            }
        }));
    Ok(SumOutput {
        schema_version: SCHEMA_VERSION,
        summand: path.display().to_string(),
        strategy: Strategy::Mdl { s }.to_string(),
        flavor: args.flavor,
        h: args.h,
        s,
        n: args.n,
        estimate,
        reference: None,
        abs_error: None,
        rel_error: None,
        evaluations: rows.len(),
    }
    .to_text())
}

/// Parse `a..b` (inclusive), `a..=b` or `a,b,c`.
pub fn parse_orders(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "bad order list `{text}` (expected `1..20` or `4,8,16`)"
        ))
    };
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let orders = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if orders.is_empty() || orders.contains(&0) {
        return Err(bad());
    }
    Ok(orders)
}

pub fn converge_text(args: &ConvergeArgs) -> Result<String, CliError> {
    let builtin = Builtin::parse(&args.summand)?;
    let orders = parse_orders(&args.n)?;
    let m = measure(args.h, args.s.unwrap_or(builtin.decay()), args.flavor)?;
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let reports = convergence_study(
        &builtin.summand(),
        &m,
        &orders,
        &args.strategies,
        Execution::Parallel,
    )
    .map_err(|e| CliError::from_core(e, max_order, m.hs()))?;

    let mut out = String::from("strategy,N,estimate,abs_error,evals\n");
    for report in &reports {
        for row in &report.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                report.strategy,
                row.order,
                fmt17(row.estimate),
                fmt17(row.abs_error),
                row.evaluations
            );
        }
    }
    Ok(out)
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn roots_text(args: &RootsArgs) -> Result<String, CliError> {
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(args.hs_min > 0.0 && args.hs_min <= args.hs_max && args.hs_max <= 4.0) {
        return Err(CliError::Usage(format!(
            "need 0 < hs-min <= hs-max <= 4, got {} and {}",
            args.hs_min, args.hs_max
        )));
    }
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let grid = linspace(args.hs_min, args.hs_max, args.steps);
    let mut out = String::from("hs,k,node,node_minus_kh\n");
    for &hs in &grid {
        let rows = root_trajectory(args.n, args.s, &[hs])
            .map_err(|e| CliError::from_core(e, args.n, hs))?;
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt17(r.hs),
                r.k,
                fmt17(r.node),
                fmt17(r.node_minus_kh)
            );
        }
    }
    Ok(out)
}
