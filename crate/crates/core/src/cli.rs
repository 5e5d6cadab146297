//! Command-line front end: `sweep`, `coeffs`, `fit`, `verify`, `compare`.
//!
//! Every command renders its full output in memory before touching the
//! destination, so a failing run never leaves a partial file behind.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algebra::{coefficients_with, AlgebraBudget};
use crate::error::{Error, Result};
use crate::evolve::{chain_length, linear_grid, truncations_distinguishable, sweep_photon_number_with_tail, DEFAULT_LEAK_TOL, DEFAULT_TOL};
use crate::output::{
    comparison_summary_json, fit_json, read_coefficients_csv, write_coefficients_csv, write_comparison_csv,
    write_sweep_csv,
};
use crate::series::{compare_taylor_numeric, default_fit_count, fit_exponential, DEFAULT_FIT_POINTS};
use crate::verify::{run_checks, Check, VerifyConfig};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "SQUEEZELAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

const DEFAULT_GRID: &str = "0:1:0.005";

#[derive(Debug, Parser)]
#[command(name = "squeezelab", version, about = "Generalized squeezed states: truncated-basis numerics and exact series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean photon number over an r grid and a list of truncations (CSV).
    Sweep(SweepArgs),
    /// Exact Taylor coefficients of the mean photon number (CSV).
    Coeffs(CoeffsArgs),
    /// Exponential fit of the coefficients and radius estimate (JSON).
    Fit(FitArgs),
    /// Run the invariant suite and print pass/fail per check.
    Verify(VerifyArgs),
    /// Taylor partial sum against two truncations (CSV plus summary JSON).
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: u32,
    /// Grid as start:stop:step.
    #[arg(long, default_value = DEFAULT_GRID)]
    pub r: String,
    /// Comma-separated truncations.
    #[arg(long = "N", default_value = "2000,2001")]
    pub levels: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Leakage tail in levels [default: max(10, 2n)].
    #[arg(long)]
    pub tail: Option<usize>,
    /// Leakage above which a row is reported on stderr.
    #[arg(long = "leak-tol", default_value_t = DEFAULT_LEAK_TOL)]
    pub leak_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub n: u32,
    /// Number of non-zero (even) powers [default: 20 for n = 3, else 10].
    #[arg(long = "M")]
    pub count: Option<u32>,
    /// Also emit the odd powers (all zero).
    #[arg(long)]
    pub odd: bool,
    #[arg(long = "max-terms", default_value_t = AlgebraBudget::default().max_terms)]
    pub max_terms: usize,
    #[arg(long = "max-degree", default_value_t = AlgebraBudget::default().max_degree)]
    pub max_degree: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Order to compute inline (ignored with --input).
    #[arg(long)]
    pub n: Option<u32>,
    /// Even powers entering the fit [default: 10 for n <= 3, 5 for n >= 4;
    /// with --input, the whole file].
    #[arg(long = "M")]
    pub count: Option<u32>,
    /// Fit window: the last this many non-zero coefficients.
    #[arg(long, default_value_t = DEFAULT_FIT_POINTS)]
    pub points: usize,
    /// Coefficient CSV as written by `coeffs`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check to run (repeatable) [default: all].
    #[arg(long)]
    pub check: Vec<String>,
    /// Restrict to one order [default: 1..=4].
    #[arg(long)]
    pub n: Option<u32>,
    /// Highest number state for the algebraic checks.
    #[arg(long, default_value_t = 20)]
    pub levels: u64,
    /// Truncation pair for the sweep-based checks.
    #[arg(long = "N")]
    pub levels_pair: Option<String>,
    #[arg(long, default_value = DEFAULT_GRID)]
    pub r: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long = "leak-tol", default_value_t = DEFAULT_LEAK_TOL)]
    pub leak_tol: f64,
    /// Relative agreement between the two truncations.
    #[arg(long = "agree-tol", default_value_t = 1e-8)]
    pub agree_tol: f64,
    /// Finite-difference step for the second-derivative check.
    #[arg(long)]
    pub h: Option<f64>,
    /// Print per-item tables.
    #[arg(long)]
    pub verbose: bool,
    /// JSON report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Truncation pair.
    #[arg(long = "N", default_value = "4200,4201")]
    pub levels: String,
    /// Non-zero Taylor terms in the partial sum.
    #[arg(long = "M", default_value_t = 20)]
    pub count: u32,
    #[arg(long, default_value = DEFAULT_GRID)]
    pub r: String,
    /// Absolute agreement between the three values.
    #[arg(long = "agree-tol", default_value_t = 1e-6)]
    pub agree_tol: f64,
    /// CSV destination [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON destination [default: next to --out with a .json
    /// extension, or stderr].
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!("grid `{spec}` is not start:stop:step")));
    }
    let mut vals = [0.0; 3];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("grid `{spec}`: `{p}` is not a number")))?;
    }
    linear_grid(vals[0], vals[1], vals[2])
}

/// Parses a comma-separated truncation list.
pub fn parse_levels(spec: &str) -> Result<Vec<usize>> {
    let levels = spec
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("truncation `{p}` is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    if levels.is_empty() {
        return Err(Error::InvalidArgument("truncation list is empty".into()));
    }
    Ok(levels)
}

fn parse_pair(spec: &str) -> Result<(usize, usize)> {
    match parse_levels(spec)?.as_slice() {
        &[a, b] if a != b => Ok((a, b)),
        _ => Err(Error::InvalidArgument(format!("`{spec}` is not a pair of distinct truncations"))),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("--{name} must be positive, got {v}")))
    }
}

/// Applies `SQUEEZELAB_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool that already exists (e.g. a second call in-process) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Writes `bytes` to `path` through a sibling temporary file, or to `stdout`.
fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match path {
        None => {
            stdout.write_all(bytes)?;
            Ok(())
        }
        Some(path) => {
            let name = path
                .file_name()
                .ok_or_else(|| Error::InvalidArgument(format!("output path `{}` has no file name", path.display())))?;
            let mut tmp_name = OsString::from(".");
            tmp_name.push(name);
            tmp_name.push(format!(".tmp{}", std::process::id()));
            let tmp = path.with_file_name(tmp_name);
            fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path)).map_err(|e| {
                let _ = fs::remove_file(&tmp);
                Error::Io(format!("{}: {e}", path.display()))
            })
        }
    }
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let grid = parse_grid(&args.r)?;
    let mut levels = parse_levels(&args.levels)?;
    levels.sort_unstable();
    levels.dedup();
    positive("tol", args.tol)?;
    positive("leak-tol", args.leak_tol)?;
    let sweep = sweep_photon_number_with_tail(args.n, &grid, &levels, args.tol, args.tail)?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &sweep)?;
    emit(args.out.as_deref(), &buf, stdout)?;

    let leaky = sweep.rows.iter().filter(|r| r.status.is_ok() && !(r.leakage < args.leak_tol)).count();
    if leaky > 0 {
        writeln!(stderr, "{leaky} rows have leakage >= {:e}; treat them as truncation-dominated", args.leak_tol)?;
    }
    let failed = sweep.failed_rows();
    if failed > 0 {
        writeln!(stderr, "{failed} of {} rows failed", sweep.rows.len())?;
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

fn default_coeff_count(order: u32) -> u32 {
    if order == 3 {
        20
    } else {
        10
    }
}

fn cmd_coeffs(args: &CoeffsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let count = args.count.unwrap_or_else(|| default_coeff_count(args.n));
    let budget = AlgebraBudget { max_degree: args.max_degree, max_terms: args.max_terms };
    let series = coefficients_with(args.n, count, &budget)?;
    let mut buf = Vec::new();
    write_coefficients_csv(&mut buf, &series, args.odd)?;
    emit(args.out.as_deref(), &buf, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<i32> {
    let series = match (&args.input, args.n) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let series = read_coefficients_csv(BufReader::new(file))?;
            match args.count {
                Some(m) => series.truncated(2 * m),
                None => series,
            }
        }
        (None, Some(n)) => {
            let count = args.count.unwrap_or_else(|| default_fit_count(n));
            coefficients_with(n, count, &AlgebraBudget::default())?
        }
        (None, None) => return Err(Error::InvalidArgument("fit needs --n or --input".into())),
    };
    let fit = fit_exponential(&series, args.points)?;
    let mut json = fit_json(&fit);
    json.push('\n');
    emit(args.out.as_deref(), json.as_bytes(), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let checks = if args.check.is_empty() {
        Check::ALL.to_vec()
    } else {
        args.check.iter().map(|c| c.parse()).collect::<Result<Vec<Check>>>()?
    };
    let mut cfg = VerifyConfig {
        levels: args.levels,
        r_grid: parse_grid(&args.r)?,
        leak_tol: args.leak_tol,
        agree_tol: args.agree_tol,
        tol: args.tol,
        fd_step: args.h,
        ..VerifyConfig::default()
    };
    if let Some(n) = args.n {
        cfg.orders = vec![n];
    }
    if let Some(pair) = &args.levels_pair {
        cfg.truncations = Some(parse_pair(pair)?);
    }
    let outcomes = run_checks(&checks, &cfg)?;
    let mut text = String::new();
    for o in &outcomes {
        text.push_str(&o.to_string());
        text.push('\n');
        if args.verbose || !args.check.is_empty() {
            for line in &o.details {
                text.push_str("    ");
                text.push_str(line);
                text.push('\n');
            }
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    text.push_str(&format!("{} checks, {failed} failed\n", outcomes.len()));
    stdout.write_all(text.as_bytes())?;
    if let Some(path) = &args.out {
        let mut json = serde_json::to_string_pretty(&outcomes).map_err(|e| Error::Io(e.to_string()))?;
        json.push('\n');
        emit(Some(path), json.as_bytes(), stdout)?;
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERIC })
}

fn cmd_compare(args: &CompareArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let levels = parse_pair(&args.levels)?;
    let grid = parse_grid(&args.r)?;
    positive("agree-tol", args.agree_tol)?;
    let series = coefficients_with(args.n, args.count, &AlgebraBudget::default())?;
    let table = compare_taylor_numeric(&series, levels, &grid, args.agree_tol)?;
    if !truncations_distinguishable(args.n, levels.0, levels.1) {
        writeln!(
            stderr,
            "warning: N = {} and N = {} keep the same {} chain levels for n = {}; their agreement is automatic",
            levels.0,
            levels.1,
            chain_length(args.n, levels.0),
            args.n
        )?;
    }
    let fit_count = default_fit_count(args.n).min(args.count);
    let fit = fit_exponential(&series.truncated(2 * fit_count), DEFAULT_FIT_POINTS).ok();

    let mut csv = Vec::new();
    write_comparison_csv(&mut csv, &table)?;
    let mut summary = comparison_summary_json(&table, args.count, fit.as_ref());
    summary.push('\n');

    let summary_path = args.summary.clone().or_else(|| args.out.as_ref().map(|p| p.with_extension("json")));
    if summary_path.as_deref().is_some_and(|s| Some(s) == args.out.as_deref()) {
        return Err(Error::InvalidArgument("summary path must differ from --out".into()));
    }
    emit(args.out.as_deref(), &csv, stdout)?;
    match summary_path {
        Some(path) => emit(Some(&path), summary.as_bytes(), stdout)?,
        None => stderr.write_all(summary.as_bytes())?,
    }
    let failed = table.rows.iter().any(|r| r.numeric_a.is_nan() || r.numeric_b.is_nan());
    Ok(if failed { EXIT_NUMERIC } else { EXIT_OK })
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::Coeffs(a) => cmd_coeffs(a, stdout),
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Compare(a) => cmd_compare(a, stdout, stderr),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
