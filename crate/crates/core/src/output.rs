//! Plot-ready CSV and JSON serializations. Floats carry 17 significant
//! digits; exact rationals are written as integer strings.

use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::algebra::{rational_to_f64, CoefficientSeries};
use crate::error::{Error, Result};
use crate::evolve::{truncations_distinguishable, SweepResult};
use crate::series::{ComparisonTable, FitResult};

pub const SWEEP_HEADER: &str = "n,N,r,mean_photon,leakage,norm_error,status";
pub const COEFF_HEADER: &str = "n,m,numerator,denominator,decimal";
pub const COMPARE_HEADER: &str = "r,numeric_N,numeric_Nprime,taylor,diff_num,diff_taylor,converged";

/// Float with 17 significant digits (`1.2345678901234567e-3`).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number (or `null` for non-finite values).
pub fn json_f64(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        "null".to_string()
    }
}

pub fn write_sweep_csv<W: Write>(out: &mut W, sweep: &SweepResult) -> Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in &sweep.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sweep.order,
            row.levels,
            fmt_f64(row.r),
            fmt_f64(row.mean_photon),
            fmt_f64(row.leakage),
            fmt_f64(row.norm_error),
            row.status.label()
        )?;
    }
    Ok(())
}

/// Writes the even powers, plus the odd ones when `include_odd` is set.
pub fn write_coefficients_csv<W: Write>(out: &mut W, series: &CoefficientSeries, include_odd: bool) -> Result<()> {
    writeln!(out, "{COEFF_HEADER}")?;
    for (m, c) in &series.entries {
        if m % 2 == 1 && !include_odd {
            continue;
        }
        writeln!(out, "{},{},{},{},{}", series.order, m, c.numer(), c.denom(), fmt_f64(rational_to_f64(c)))?;
    }
    Ok(())
}

/// Reads a coefficient CSV back into a series. Powers missing from the file
/// are not filled in.
pub fn read_coefficients_csv<R: BufRead>(input: R) -> Result<CoefficientSeries> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidArgument("empty coefficient file".into()))??;
    if header.trim() != COEFF_HEADER {
        return Err(Error::InvalidArgument(format!("unexpected coefficient header `{}`", header.trim())));
    }
    let mut order = None;
    let mut entries = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || Error::InvalidArgument(format!("malformed coefficient row {}: `{line}`", lineno + 2));
        if fields.len() != 5 {
            return Err(bad());
        }
        let n: u32 = fields[0].parse().map_err(|_| bad())?;
        let m: u32 = fields[1].parse().map_err(|_| bad())?;
        let num: BigInt = fields[2].parse().map_err(|_| bad())?;
        let den: BigInt = fields[3].parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(bad());
        }
        match order {
            None => order = Some(n),
            Some(prev) if prev != n => {
                return Err(Error::InvalidArgument(format!("mixed orders {prev} and {n} in coefficient file")))
            }
            Some(_) => {}
        }
        entries.push((m, BigRational::new(num, den)));
    }
    entries.sort_by_key(|(m, _)| *m);
    if entries.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument("duplicate power in coefficient file".into()));
    }
    Ok(CoefficientSeries { order: order.unwrap_or(0), entries })
}

/// Flat record `{n, M, points_used, alpha, alpha_stderr, radius}`.
pub fn fit_json(fit: &FitResult) -> String {
    let points: Vec<String> = fit.points_used.iter().map(|m| m.to_string()).collect();
    format!(
        "{{\"n\":{},\"M\":{},\"points_used\":[{}],\"alpha\":{},\"alpha_stderr\":{},\"radius\":{}}}",
        fit.order,
        fit.count,
        points.join(","),
        json_f64(fit.alpha),
        fit.alpha_stderr.map_or("null".to_string(), json_f64),
        json_f64(fit.radius)
    )
}

pub fn write_comparison_csv<W: Write>(out: &mut W, table: &ComparisonTable) -> Result<()> {
    writeln!(out, "{COMPARE_HEADER}")?;
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(row.r),
            fmt_f64(row.numeric_a),
            fmt_f64(row.numeric_b),
            fmt_f64(row.taylor),
            fmt_f64(row.diff_num),
            fmt_f64(row.diff_taylor),
            row.converged
        )?;
    }
    Ok(())
}

/// Summary of a comparison run.
pub fn comparison_summary_json(table: &ComparisonTable, count: u32, fit: Option<&FitResult>) -> String {
    let first = table.first_numeric_disagreement().map_or("null".to_string(), json_f64);
    let (alpha, radius) = match fit {
        Some(f) => (json_f64(f.alpha), json_f64(f.radius)),
        None => ("null".to_string(), "null".to_string()),
    };
    format!(
        "{{\"n\":{},\"N\":{},\"Nprime\":{},\"M\":{},\"agree_tol\":{},\"alpha\":{},\"radius\":{},\"first_disagreement\":{},\"distinct_chains\":{},\"rows\":{},\"converged_rows\":{}}}",
        table.order,
        table.levels.0,
        table.levels.1,
        count,
        json_f64(table.agree_tol),
        alpha,
        radius,
        first,
        truncations_distinguishable(table.order, table.levels.0, table.levels.1),
        table.rows.len(),
        table.rows.iter().filter(|r| r.converged).count()
    )
}
