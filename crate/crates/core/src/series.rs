//! Growth-rate fits of the exact Taylor coefficients, radius-of-convergence
//! estimates and Taylor-versus-truncated-basis comparisons.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::algebra::{rational_ln_abs, taylor_partial_sum, CoefficientSeries};
use crate::error::{Error, Result};
use crate::evolve::{check_grid, sweep_photon_number, DEFAULT_TOL};

/// Window used by default for the exponential fit.
pub const DEFAULT_FIT_POINTS: usize = 5;

/// Number of even powers entering the default fit: powers up to `m = 20`
/// for `n = 3` and up to `m = 10` for `n >= 4`.
pub fn default_fit_count(order: u32) -> u32 {
    match order {
        0..=3 => 10,
        _ => 5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub order: u32,
    /// Number of even powers in the series the fit was drawn from.
    pub count: u32,
    pub points_used: Vec<u32>,
    /// Slope of `ln c_m` against the power `m`.
    pub alpha: f64,
    /// OLS standard error of the slope; `None` for a two-point fit.
    pub alpha_stderr: Option<f64>,
    pub intercept: f64,
    /// `exp(-alpha)`.
    pub radius: f64,
}

/// Ordinary least squares of `ln c_m` against `m` over the last
/// `last_points` non-zero coefficients.
pub fn fit_exponential(series: &CoefficientSeries, last_points: usize) -> Result<FitResult> {
    if last_points < 2 {
        return Err(Error::Fit(format!("need at least 2 points, asked for {last_points}")));
    }
    let nonzero: Vec<_> = series.entries.iter().filter(|(_, c)| !c.is_zero()).collect();
    if nonzero.len() < last_points {
        return Err(Error::Fit(format!(
            "series has {} non-zero coefficients, fewer than the requested window of {last_points}",
            nonzero.len()
        )));
    }
    let window = &nonzero[nonzero.len() - last_points..];
    if let Some((m, c)) = window.iter().find(|(_, c)| c.is_negative()) {
        return Err(Error::Fit(format!("coefficient c_{m} = {c} is negative; logarithm undefined")));
    }
    let xs: Vec<f64> = window.iter().map(|(m, _)| *m as f64).collect();
    let ys: Vec<f64> = window.iter().map(|(_, c)| rational_ln_abs(c)).collect();
    let line = ols(&xs, &ys);
    Ok(FitResult {
        order: series.order,
        count: (series.max_power() / 2),
        points_used: window.iter().map(|(m, _)| *m).collect(),
        alpha: line.slope,
        alpha_stderr: line.slope_stderr,
        intercept: line.intercept,
        radius: (-line.slope).exp(),
    })
}

struct Line {
    slope: f64,
    intercept: f64,
    slope_stderr: Option<f64>,
}

fn ols(xs: &[f64], ys: &[f64]) -> Line {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = (xs.len() > 2).then(|| {
        let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (k - 2.0) / sxx).sqrt()
    });
    Line { slope, intercept, slope_stderr }
}

/// `(m, |c_m|^(1/m))` for every computed power.
pub fn root_test_sequence(series: &CoefficientSeries) -> Vec<(u32, f64)> {
    series
        .entries
        .iter()
        .filter(|(m, _)| *m > 0)
        .map(|(m, c)| {
            let value = if c.is_zero() { 0.0 } else { (rational_ln_abs(c) / *m as f64).exp() };
            (*m, value)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub r: f64,
    pub numeric_a: f64,
    pub numeric_b: f64,
    pub taylor: f64,
    /// `|numeric_a - numeric_b|`.
    pub diff_num: f64,
    /// Largest `|taylor - numeric|` over the two truncations.
    pub diff_taylor: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub order: u32,
    pub levels: (usize, usize),
    pub agree_tol: f64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// First grid `r` where the two truncations differ by more than the
    /// agreement tolerance (or either failed).
    pub fn first_numeric_disagreement(&self) -> Option<f64> {
        self.rows.iter().find(|row| !(row.diff_num <= self.agree_tol)).map(|row| row.r)
    }
}

/// Numeric photon numbers at two truncations alongside the Taylor partial
/// sum of `series`, per grid point.
pub fn compare_taylor_numeric(
    series: &CoefficientSeries,
    levels: (usize, usize),
    r_grid: &[f64],
    agree_tol: f64,
) -> Result<ComparisonTable> {
    if levels.0 == levels.1 {
        return Err(Error::InvalidArgument("truncation pair must be distinct".into()));
    }
    if !(agree_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("agreement tolerance must be positive, got {agree_tol}")));
    }
    check_grid("r", r_grid)?;
    let order = series.order;
    let (lo, hi) = (levels.0.min(levels.1), levels.0.max(levels.1));
    let sweep = sweep_photon_number(order, r_grid, &[lo, hi], DEFAULT_TOL)?;
    let a = sweep.curve(levels.0);
    let b = sweep.curve(levels.1);
    let rows = r_grid
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&r, (ra, rb))| {
            let taylor = taylor_partial_sum(series, r);
            let numeric_a = ra.mean_photon;
            let numeric_b = rb.mean_photon;
            let diff_num = (numeric_a - numeric_b).abs();
            let diff_taylor = (taylor - numeric_a).abs().max((taylor - numeric_b).abs());
            let converged = ra.status.is_ok()
                && rb.status.is_ok()
                && diff_num <= agree_tol
                && diff_taylor <= agree_tol;
            ComparisonRow { r, numeric_a, numeric_b, taylor, diff_num, diff_taylor, converged }
        })
        .collect();
    Ok(ComparisonTable { order, levels, agree_tol, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::coefficients;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::One;

    fn synthetic(values: &[(u32, BigRational)]) -> CoefficientSeries {
        CoefficientSeries { order: 0, entries: values.to_vec() }
    }

    /// `c_m ~ exp(rate m)` to about 15 significant digits.
    fn exp_series(rate: f64, powers: &[u32]) -> CoefficientSeries {
        let entries = powers
            .iter()
            .map(|&m| {
                let log10 = rate * m as f64 / std::f64::consts::LN_10;
                let whole = log10.floor();
                let mantissa = (10f64.powf(log10 - whole) * 1e15).round() as i64;
                let num = BigInt::from(mantissa) * BigInt::from(10).pow(whole as u32);
                (m, BigRational::new(num, BigInt::from(10).pow(15)))
            })
            .collect();
        CoefficientSeries { order: 0, entries }
    }

    #[test]
    fn exact_exponential_data() {
        let series = exp_series(2.0, &[2, 4, 6, 8, 10, 12]);
        let fit = fit_exponential(&series, 5).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-12);
        assert!((fit.radius - (-2.0f64).exp()).abs() < 1e-14);
        assert_eq!(fit.points_used, vec![4, 6, 8, 10, 12]);
        assert!(fit.alpha_stderr.unwrap() < 1e-12);
        assert!((fit.radius * fit.alpha.exp() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rescaling_changes_intercept_only() {
        let series = coefficients(3, 10).unwrap();
        let fit = fit_exponential(&series, 5).unwrap();
        let lambda = BigRational::new(BigInt::from(7), BigInt::from(3));
        let scaled = CoefficientSeries {
            order: 3,
            entries: series.entries.iter().map(|(m, c)| (*m, c * &lambda)).collect(),
        };
        let refit = fit_exponential(&scaled, 5).unwrap();
        assert!((fit.alpha - refit.alpha).abs() < 1e-12);
        assert!((refit.intercept - fit.intercept - (7f64 / 3.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn fit_errors() {
        let one = BigRational::one();
        let s = synthetic(&[(2, one.clone()), (4, -one.clone()), (6, one.clone())]);
        assert!(matches!(fit_exponential(&s, 3), Err(Error::Fit(_))));
        assert!(fit_exponential(&s, 4).is_err());
        assert!(fit_exponential(&s, 1).is_err());
        // displacement series has a single non-zero coefficient
        let disp = coefficients(1, 5).unwrap();
        assert!(fit_exponential(&disp, 2).is_err());
        let two = fit_exponential(&synthetic(&[(2, one.clone()), (4, one)]), 2).unwrap();
        assert_eq!(two.alpha_stderr, None);
    }

    #[test]
    fn root_test_values() {
        let ones = synthetic(&[(1, BigRational::one()), (2, BigRational::one()), (3, BigRational::one())]);
        assert_eq!(root_test_sequence(&ones), vec![(1, 1.0), (2, 1.0), (3, 1.0)]);
        // sinh^2 is entire: the root test decays
        let s2 = coefficients(2, 15).unwrap();
        let seq: Vec<f64> = root_test_sequence(&s2).into_iter().filter(|(m, _)| m % 2 == 0).map(|(_, v)| v).collect();
        assert!(seq.windows(2).skip(2).all(|w| w[1] < w[0]));
        assert!(*seq.last().unwrap() < 0.4);
    }

    #[test]
    fn two_photon_slopes_turn_negative() {
        let s2 = coefficients(2, 20).unwrap();
        let slopes: Vec<f64> = (6..=20u32)
            .map(|top| fit_exponential(&s2.truncated(2 * top), 5).unwrap().alpha)
            .collect();
        assert!(slopes.windows(2).all(|w| w[1] < w[0]));
        assert!(*slopes.last().unwrap() < -1.0);
    }

    #[test]
    fn comparison_rejects_bad_input() {
        let s = coefficients(3, 2).unwrap();
        assert!(compare_taylor_numeric(&s, (100, 100), &[0.0], 1e-6).is_err());
        assert!(compare_taylor_numeric(&s, (100, 101), &[], 1e-6).is_err());
        assert!(compare_taylor_numeric(&s, (100, 101), &[0.0], 0.0).is_err());
    }

    #[test]
    fn comparison_origin_row() {
        let s = coefficients(3, 5).unwrap();
        let table = compare_taylor_numeric(&s, (200, 201), &[0.0, 0.01], 1e-6).unwrap();
        let row = &table.rows[0];
        assert_eq!(row.taylor, 0.0);
        assert!(row.numeric_a.abs() < 1e-20 && row.numeric_b.abs() < 1e-20);
        assert!(table.rows.iter().all(|r| r.converged));
        assert_eq!(table.first_numeric_disagreement(), None);
    }
}
