//! Command-line front end. [`run`] takes explicit I/O handles so the binary
//! and the tests share one code path.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bounds::{
    random_corpus, rho_bounds, tau_bounds, verify_items, CorpusItem, CorpusKind, SweepReport,
};
use crate::coefficients::{
    coefficient_set, gumbel_tau_from_lambda, gumbel_theta_from_lambda, rho_numeric,
};
use crate::copula::EvCopula;
use crate::montecarlo::{
    empirical_coefficients, read_pairs, sample_generic, sample_mo, write_pairs,
};
use crate::pickands::{
    gumbel_dependence, mo_dependence, pareto_dependence, piecewise_linear_dependence,
    read_knots_csv, write_knots_csv, DependenceFunction,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Published Gumbel table `(lambda, theta, rho)`, three decimals.
pub const PUBLISHED_GUMBEL_TABLE: [(f64, f64, f64); 11] = [
    (0.0, 1.0, 0.0),
    (0.1, 1.080, 0.110),
    (0.2, 1.179, 0.225),
    (0.3, 1.306, 0.342),
    (0.4, 1.475, 0.461),
    (0.5, 1.710, 0.581),
    (0.6, 2.060, 0.699),
    (0.7, 2.641, 0.808),
    (0.8, 3.802, 0.904),
    (0.9, 7.273, 0.973),
    (1.0, f64::INFINITY, 1.0),
];

/// Largest allowed distance from a published table entry.
pub const TABLE_TOLERANCE: f64 = 0.0015;

#[derive(Debug, Parser)]
#[command(name = "evcopula", version, about = "Extreme value copula toolkit")]
pub struct Cli {
    /// Output table format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Mo,
    Gumbel,
    Pareto,
    Pl,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// `t,A` knots for `--family pl`.
    #[arg(long)]
    pub knots_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMethod {
    /// Shock construction; Marshall-Olkin only.
    Exact,
    /// Conditional inversion; any family.
    Generic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spearman rho, Kendall tau, tail coefficient and Blomqvist beta.
    Coeffs(FamilyArgs),
    /// Gumbel theta and rho for lambda = 0, 0.1, ..., 1.
    GumbelTable {
        /// Decimals printed for theta and rho.
        #[arg(long, default_value_t = 3)]
        precision: usize,
    },
    /// Coefficient bounds and Gumbel coefficients as functions of lambda.
    BoundsCurve {
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Randomized check of every bound over a corpus of dependence functions.
    Verify {
        #[arg(long, default_value_t = 100)]
        n_random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Envelope grid size per axis.
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// Extra `t,A` knots file appended to the corpus.
        #[arg(long)]
        knots_file: Option<PathBuf>,
        /// Where failing dependence functions are written.
        #[arg(long, default_value = ".")]
        dump_dir: PathBuf,
    },
    /// Draw `u,v` pairs.
    Sample {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(short = 'n', long = "count")]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to exact for mo, generic otherwise.
        #[arg(long, value_enum)]
        method: Option<SampleMethod>,
    },
    /// Empirical coefficients from `u,v` pairs.
    Estimate {
        /// Input file; stdin if absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.90, 0.95, 0.99])]
        lambda_thresholds: Vec<f64>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Violation(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.output {
        Some(path) => match File::create(path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                execute(&cli, stdin, &mut w, stderr).and_then(|()| w.flush().map_err(Failure::from))
            }
            Err(e) => Err(Failure::Usage(format!("{}: {e}", path.display()))),
        },
        None => execute(&cli, stdin, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Violation(msg)) => {
            let _ = writeln!(stderr, "{msg}");
            EXIT_VIOLATION
        }
    }
}

fn execute(cli: &Cli, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let delim = cli.format.delimiter();
    match &cli.command {
        Command::Coeffs(fam) => cmd_coeffs(fam, delim, out),
        Command::GumbelTable { precision } => cmd_gumbel_table(*precision, delim, out),
        Command::BoundsCurve { step } => cmd_bounds_curve(*step, delim, out),
        Command::Verify {
            n_random,
            seed,
            grid,
            knots_file,
            dump_dir,
        } => cmd_verify(
            *n_random,
            *seed,
            *grid,
            knots_file.as_deref(),
            dump_dir,
            delim,
            out,
            err,
        ),
        Command::Sample {
            family,
            count,
            seed,
            method,
        } => cmd_sample(family, *count, *seed, *method, delim, out),
        Command::Estimate {
            input,
            lambda_thresholds,
        } => cmd_estimate(input.as_deref(), lambda_thresholds, delim, stdin, out),
    }
}

fn table(out: &mut dyn Write, delim: u8) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .delimiter(delim)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn required(value: Option<f64>, flag: &str, family: &str) -> std::result::Result<f64, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--family {family} requires --{flag}")))
}

fn read_knots_file(path: &Path) -> std::result::Result<DependenceFunction, Failure> {
    let f = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let knots = read_knots_csv(BufReader::new(f))?;
    Ok(piecewise_linear_dependence(knots)?)
}

fn build_dependence(fam: &FamilyArgs) -> std::result::Result<DependenceFunction, Failure> {
    Ok(match fam.family {
        FamilyName::Mo => mo_dependence(
            required(fam.alpha, "alpha", "mo")?,
            required(fam.beta, "beta", "mo")?,
        )?,
        FamilyName::Gumbel => gumbel_dependence(required(fam.theta, "theta", "gumbel")?)?,
        FamilyName::Pareto => pareto_dependence(
            required(fam.a, "a", "pareto")?,
            required(fam.b, "b", "pareto")?,
        )?,
        FamilyName::Pl => {
            let path = fam
                .knots_file
                .as_deref()
                .ok_or_else(|| Failure::Usage("--family pl requires --knots-file".into()))?;
            read_knots_file(path)?
        }
    })
}

fn cmd_coeffs(fam: &FamilyArgs, delim: u8, out: &mut dyn Write) -> Outcome {
    let dep = build_dependence(fam)?;
    let set = coefficient_set(&dep)?;
    let mut w = table(out, delim);
    w.write_record(["coefficient", "value", "method"])?;
    for (name, c) in [
        ("rho", set.rho),
        ("tau", set.tau),
        ("lambda", set.lambda),
        ("beta", set.beta),
    ] {
        w.write_record([name.to_string(), num(c.value), c.method.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn fixed(x: f64, precision: usize) -> String {
    if x.is_infinite() {
        return "inf".into();
    }
    // Avoid printing "-0.000".
    let half_ulp = 0.5 * 10f64.powi(-(precision as i32));
    let x = if x.abs() < half_ulp { 0.0 } else { x };
    format!("{x:.precision$}")
}

/// One row of the Gumbel table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelRow {
    pub lambda: f64,
    pub theta: f64,
    pub rho: f64,
}

pub fn gumbel_table() -> crate::Result<Vec<GumbelRow>> {
    (0..=10)
        .map(|i| {
            let lambda = i as f64 / 10.0;
            let theta = gumbel_theta_from_lambda(lambda)?;
            let rho = if theta.is_infinite() {
                1.0
            } else {
                rho_numeric(&gumbel_dependence(theta)?)?
            };
            Ok(GumbelRow { lambda, theta, rho })
        })
        .collect()
}

fn table_flag(name: &str, computed: f64, published: f64) -> Option<String> {
    if computed.is_infinite() && published.is_infinite() {
        return None;
    }
    if (computed - published).abs() > TABLE_TOLERANCE {
        return Some(format!(
            "{name} off published {published:.3} beyond tolerance"
        ));
    }
    if fixed(computed, 3) != fixed(published, 3) {
        return Some(format!(
            "{name} last digit differs from published {published:.3}"
        ));
    }
    None
}

fn cmd_gumbel_table(precision: usize, delim: u8, out: &mut dyn Write) -> Outcome {
    let rows = gumbel_table()?;
    let mut w = table(out, delim);
    w.write_record(["lambda", "theta", "rho", "flag"])?;
    for (row, &(_, pt, pr)) in rows.iter().zip(&PUBLISHED_GUMBEL_TABLE) {
        let flags: Vec<String> = [
            table_flag("theta", row.theta, pt),
            table_flag("rho", row.rho, pr),
        ]
        .into_iter()
        .flatten()
        .collect();
        w.write_record([
            format!("{:.1}", row.lambda),
            fixed(row.theta, precision),
            fixed(row.rho, precision),
            flags.join("; "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the bounds curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub lambda: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub rho_gumbel: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub tau_gumbel: f64,
}

/// `lambda` runs from 0 to 1 inclusive in increments of `step`.
pub fn bounds_curve(step: f64) -> crate::Result<Vec<CurveRow>> {
    crate::error::check_range("step", step, f64::MIN_POSITIVE, 0.1, "0 < step <= 0.1")?;
    let count = (1.0 / step - 1e-9).ceil() as usize;
    (0..=count)
        .into_par_iter()
        .map(|k| {
            let lambda = ((k as f64 * step).min(1.0) * 1e12).round() / 1e12;
            let theta = gumbel_theta_from_lambda(lambda)?;
            let rho_gumbel = if theta.is_infinite() {
                1.0
            } else {
                rho_numeric(&gumbel_dependence(theta)?)?
            };
            let (r, t) = (rho_bounds(lambda)?, tau_bounds(lambda)?);
            Ok(CurveRow {
                lambda,
                rho_lo: r.lo,
                rho_hi: r.hi,
                rho_gumbel,
                tau_lo: t.lo,
                tau_hi: t.hi,
                tau_gumbel: gumbel_tau_from_lambda(lambda)?,
            })
        })
        .collect()
}

fn cmd_bounds_curve(step: f64, delim: u8, out: &mut dyn Write) -> Outcome {
    let rows = bounds_curve(step)?;
    let mut w = table(out, delim);
    w.write_record([
        "lambda",
        "rho_lo",
        "rho_hi",
        "rho_gumbel",
        "tau_lo",
        "tau_hi",
        "tau_gumbel",
    ])?;
    for r in rows {
        w.write_record(
            [
                r.lambda,
                r.rho_lo,
                r.rho_hi,
                r.rho_gumbel,
                r.tau_lo,
                r.tau_hi,
                r.tau_gumbel,
            ]
            .map(num),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_sweep(report: &SweepReport, delim: u8, out: &mut dyn Write) -> Outcome {
    let mut w = table(out, delim);
    w.write_record([
        "index",
        "family",
        "lambda",
        "rho",
        "tau",
        "rho_margin",
        "tau_margin",
        "envelope_violation",
        "inequality_margin",
        "status",
    ])?;
    for (item, r) in &report.items {
        let env = r
            .envelope
            .max_lower_violation
            .max(r.envelope.max_upper_violation);
        w.write_record([
            item.index.to_string(),
            item.kind.to_string(),
            num(r.lambda),
            num(r.rho),
            num(r.tau),
            num(r.rho_margin()),
            num(r.tau_margin()),
            num(env),
            num(r.inequalities.worst()),
            if r.passes() { "ok" } else { "VIOLATION" }.to_string(),
        ])?;
    }
    w.flush()?;
    drop(w);
    writeln!(out)?;
    let mut w = table(out, delim);
    w.write_record([
        "family",
        "count",
        "min_rho_margin",
        "min_tau_margin",
        "max_envelope_violation",
        "min_inequality_margin",
    ])?;
    for f in &report.families {
        w.write_record([
            f.kind.to_string(),
            f.count.to_string(),
            num(f.min_rho_margin),
            num(f.min_tau_margin),
            num(f.max_envelope_violation),
            num(f.min_inequality_margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    n_random: usize,
    seed: u64,
    grid: usize,
    knots_file: Option<&Path>,
    dump_dir: &Path,
    delim: u8,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    if n_random == 0 && knots_file.is_none() {
        return Err(Failure::Usage("--n-random must be at least 1".into()));
    }
    if grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    let supplied = knots_file.map(read_knots_file).transpose()?;
    let mut items = random_corpus(n_random, seed);
    if let Some(dep) = supplied {
        items.push(CorpusItem {
            index: n_random,
            kind: CorpusKind::Supplied,
            dependence: dep,
        });
    }
    let report = verify_items(items, grid)?;
    write_sweep(&report, delim, out)?;

    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        return Ok(());
    }
    std::fs::create_dir_all(dump_dir)?;
    for (item, _) in &failures {
        let path = dump_dir.join(format!("violation_{}_{}.csv", seed, item.index));
        write_knots_csv(
            BufWriter::new(File::create(&path)?),
            &item.dependence.to_knots(),
        )?;
        writeln!(err, "wrote {}", path.display())?;
    }
    Err(Failure::Violation(format!(
        "{} of {} dependence functions violate a bound",
        failures.len(),
        report.items.len()
    )))
}

fn cmd_sample(
    fam: &FamilyArgs,
    count: usize,
    seed: u64,
    method: Option<SampleMethod>,
    delim: u8,
    out: &mut dyn Write,
) -> Outcome {
    let dep = build_dependence(fam)?;
    let method = method.unwrap_or(if fam.family == FamilyName::Mo {
        SampleMethod::Exact
    } else {
        SampleMethod::Generic
    });
    let batch = match method {
        SampleMethod::Exact => {
            if fam.family != FamilyName::Mo {
                return Err(Failure::Usage(
                    "--method exact is only available for --family mo".into(),
                ));
            }
            sample_mo(
                fam.alpha.unwrap_or_default(),
                fam.beta.unwrap_or_default(),
                count,
                seed,
            )?
        }
        SampleMethod::Generic => sample_generic(&EvCopula::new(dep), count, seed)?,
    };
    write_pairs(&batch.pairs, out, delim)?;
    Ok(())
}

fn cmd_estimate(
    input: Option<&Path>,
    thresholds: &[f64],
    delim: u8,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
) -> Outcome {
    let pairs = match input {
        Some(path) => {
            let f =
                File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            read_pairs(BufReader::new(f), delim)?
        }
        None => read_pairs(stdin, delim)?,
    };
    let e = empirical_coefficients(&pairs, thresholds)?;
    let mut w = table(out, delim);
    w.write_record(["statistic", "value"])?;
    w.write_record(["n".to_string(), pairs.len().to_string()])?;
    w.write_record(["rho_hat".to_string(), num(e.rho_hat)])?;
    w.write_record(["tau_hat".to_string(), num(e.tau_hat)])?;
    w.write_record(["beta_hat".to_string(), num(e.beta_hat)])?;
    for (t, l) in &e.lambda_hat {
        w.write_record([format!("lambda_hat@{t}"), num(*l)])?;
    }
    w.write_record(["lambda_hat".to_string(), num(e.lambda_summary)])?;
    w.flush()?;
    Ok(())
}
