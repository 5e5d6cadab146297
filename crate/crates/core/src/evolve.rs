//! Squeezed states on a truncated basis, photon-number sweeps over `(N, r)`
//! and truncation-convergence diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expm::{apply_exp_generator, ChainSpectrum};
use crate::fock::{a_n_commutator_closed_form, generator, FockDim, SqueezeParams};
use crate::state::{expectation_diagonal, leakage, mean_photon, StateVector};

/// Leakage above which a state is treated as truncation-corrupted.
pub const DEFAULT_LEAK_TOL: f64 = 1e-10;

/// Default evolution tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// `max(10, 2n)` levels, clamped to fit inside the truncation.
pub fn default_tail(order: u32, dim: FockDim) -> usize {
    (2 * order as usize).max(10).min(dim.size() - 1)
}

/// Number of levels `0, n, 2n, ...` below `levels` reachable from the vacuum.
pub fn chain_length(order: u32, levels: usize) -> usize {
    levels.div_ceil(order.max(1) as usize)
}

/// Whether two truncations keep different chains for this order. Pairs that
/// do not (e.g. `N = 4000, 4001` for `n = 3`) produce identical states, so
/// their agreement carries no information.
pub fn truncations_distinguishable(order: u32, a: usize, b: usize) -> bool {
    chain_length(order, a) != chain_length(order, b)
}

/// `|r_n> = exp(r a^dag^n - r^* a^n) |0>`.
pub fn squeezed_state(params: &SqueezeParams, dim: FockDim, tol: f64) -> Result<StateVector> {
    let k = generator(params, dim)?;
    apply_exp_generator(&k, &StateVector::vacuum(dim), tol)
}

/// Reusable propagator for `|r_n>` along the ray `r = t e^{i phase}`, `t >= 0`.
///
/// The vacuum only couples to levels `0, n, 2n, ...`; that chain is
/// diagonalized once and every `t` is then an `O(M^2)` reconstruction.
#[derive(Debug, Clone)]
pub struct SqueezePropagator {
    order: u32,
    dim: FockDim,
    chain: ChainSpectrum,
}

impl SqueezePropagator {
    pub fn new(order: u32, dim: FockDim, phase: f64) -> Result<Self> {
        let unit = SqueezeParams::new(order, Complex64::from_polar(1.0, phase))?;
        let k = generator(&unit, dim)?;
        let levels = (0..dim.size()).step_by(order as usize).collect();
        let chain = ChainSpectrum::from_operator(&k, levels)?;
        Ok(SqueezePropagator { order, dim, chain })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn state(&self, modulus: f64) -> Result<StateVector> {
        if !(modulus >= 0.0) || !modulus.is_finite() {
            return Err(Error::InvalidArgument(format!("|r| must be finite and >= 0, got {modulus}")));
        }
        if modulus == 0.0 {
            return Ok(StateVector::vacuum(self.dim));
        }
        let mut input = vec![Complex64::new(0.0, 0.0); self.chain.levels().len()];
        input[0] = Complex64::new(1.0, 0.0);
        let evolved = self.chain.evolve(modulus, &input);
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim.size()];
        for (&level, z) in self.chain.levels().iter().zip(evolved) {
            amps[level] = z;
        }
        StateVector::from_amplitudes(self.dim, amps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }

    pub fn label(&self) -> &str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub levels: usize,
    pub r: f64,
    pub mean_photon: f64,
    pub leakage: f64,
    pub norm_error: f64,
    pub status: RowStatus,
}

impl SweepRow {
    fn failed(levels: usize, r: f64, err: &Error) -> Self {
        SweepRow {
            levels,
            r,
            mean_photon: f64::NAN,
            leakage: f64::NAN,
            norm_error: f64::NAN,
            status: RowStatus::Failed(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub order: u32,
    /// Sorted by `(N, r)`.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.status.is_ok()).count()
    }

    /// Rows for one truncation, in grid order.
    pub fn curve(&self, levels: usize) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.levels == levels).collect()
    }
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument(format!("{name} grid must be finite and non-negative")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("{name} grid must be strictly ascending")));
    }
    Ok(())
}

fn check_truncations(order: u32, levels: &[usize]) -> Result<Vec<FockDim>> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("truncation list is empty".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("truncation list must be strictly ascending".into()));
    }
    levels
        .iter()
        .map(|&n| {
            let dim = FockDim::new(n)?;
            dim.check_order(order)?;
            Ok(dim)
        })
        .collect()
}

fn evaluate_row(prop: &SqueezePropagator, r: f64, tail: Option<usize>) -> Result<SweepRow> {
    let psi = prop.state(r)?;
    let tail = tail.unwrap_or_else(|| default_tail(prop.order(), prop.dim()));
    Ok(SweepRow {
        levels: prop.dim().size(),
        r,
        mean_photon: mean_photon(&psi),
        leakage: leakage(&psi, tail)?,
        norm_error: psi.norm_error(),
        status: RowStatus::Ok,
    })
}

/// Mean photon number over every `(N, r)` pair.
///
/// Grid validation errors abort; evolution failures are recorded per row.
/// `tol` is the evolution tolerance, also used as the norm-error bar for
/// marking rows as failed.
pub fn sweep_photon_number(order: u32, r_grid: &[f64], levels: &[usize], tol: f64) -> Result<SweepResult> {
    sweep_photon_number_with_tail(order, r_grid, levels, tol, None)
}

/// [`sweep_photon_number`] with an explicit leakage tail (default
/// [`default_tail`]). The tail must be below every truncation.
pub fn sweep_photon_number_with_tail(
    order: u32,
    r_grid: &[f64],
    levels: &[usize],
    tol: f64,
    tail: Option<usize>,
) -> Result<SweepResult> {
    if order == 0 {
        return Err(Error::InvalidArgument("squeezing order must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    check_grid("r", r_grid)?;
    let dims = check_truncations(order, levels)?;
    if let Some(t) = tail {
        if t == 0 || dims.iter().any(|d| t >= d.size()) {
            return Err(Error::InvalidArgument(format!("tail must satisfy 1 <= tail < N, got {t}")));
        }
    }

    let norm_bar = tol.max(1e-10);
    let rows: Vec<SweepRow> = dims
        .par_iter()
        .flat_map_iter(|&dim| match SqueezePropagator::new(order, dim, 0.0) {
            Ok(prop) => r_grid
                .par_iter()
                .map(|&r| {
                    evaluate_row(&prop, r, tail)
                        .and_then(|row| {
                            if row.norm_error > norm_bar {
                                Err(Error::NonConvergence { steps: 0, residual: row.norm_error })
                            } else {
                                Ok(row)
                            }
                        })
                        .unwrap_or_else(|e| SweepRow::failed(dim.size(), r, &e))
                })
                .collect::<Vec<_>>(),
            Err(e) => r_grid.iter().map(|&r| SweepRow::failed(dim.size(), r, &e)).collect(),
        })
        .collect();
    Ok(SweepResult { order, rows })
}

/// Finite-difference and analytic second derivative of `<a^dag a>_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondDerivative {
    pub fd: f64,
    pub analytic: f64,
}

impl SecondDerivative {
    pub fn relative_gap(&self) -> f64 {
        (self.fd - self.analytic).abs() / self.analytic.abs()
    }
}

/// Central second difference of the photon number at `r` against
/// `2n <r_n| [a^n, a^dag^n] |r_n>`.
///
/// The photon number depends on `|r|` only, so `r - h < 0` is evaluated at
/// `|r - h|`. Fails if any of the three states leaks more than
/// [`DEFAULT_LEAK_TOL`] into the top of the basis.
pub fn second_derivative_check(order: u32, r: f64, dim: FockDim, h: f64, tol: f64) -> Result<SecondDerivative> {
    if !(h > 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("need r >= 0 and h > 0, got r = {r}, h = {h}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    dim.check_order(order)?;
    let prop = SqueezePropagator::new(order, dim, 0.0)?;
    let tail = default_tail(order, dim);
    let mut values = [0.0; 3];
    let mut center = None;
    for (slot, x) in [(r - h).abs(), r, r + h].into_iter().enumerate() {
        let psi = prop.state(x)?;
        let leak = leakage(&psi, tail)?;
        if leak >= DEFAULT_LEAK_TOL {
            return Err(Error::NotConverged(format!(
                "leakage {leak:e} at r = {x} exceeds {DEFAULT_LEAK_TOL:e} (N = {})",
                dim.size()
            )));
        }
        if psi.norm_error() > tol.max(1e-10) {
            return Err(Error::NonConvergence { steps: 0, residual: psi.norm_error() });
        }
        values[slot] = mean_photon(&psi);
        if slot == 1 {
            center = Some(psi);
        }
    }
    let fd = (values[2] - 2.0 * values[1] + values[0]) / (h * h);
    let a_n = a_n_commutator_closed_form(order, dim)?;
    let analytic = 2.0 * order as f64 * expectation_diagonal(&a_n, &center.expect("evaluated"))?;
    Ok(SecondDerivative { fd, analytic })
}

/// Relative disagreement of two photon numbers. Values below one are
/// compared absolutely so the vacuum end of a grid does not divide by zero.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Per-grid-point record behind [`converged_region`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPoint {
    pub r: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub leakage_a: f64,
    pub leakage_b: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergedRegion {
    pub order: u32,
    pub levels: (usize, usize),
    /// Largest certified grid value, 0 if none qualifies.
    pub r_max: f64,
    pub points: Vec<PairPoint>,
}

impl ConvergedRegion {
    /// The certified prefix of the grid.
    pub fn certified(&self) -> &[PairPoint] {
        let end = self.points.iter().position(|p| !p.converged).unwrap_or(self.points.len());
        &self.points[..end]
    }
}

/// Scans a grid with two truncations and certifies the prefix where both are
/// leakage-free and agree.
pub fn converged_region_scan(
    order: u32,
    levels: (usize, usize),
    r_grid: &[f64],
    leak_tol: f64,
    agree_tol: f64,
) -> Result<ConvergedRegion> {
    if levels.0 == levels.1 {
        return Err(Error::InvalidArgument("truncation pair must be distinct".into()));
    }
    let (lo, hi) = (levels.0.min(levels.1), levels.0.max(levels.1));
    let sweep = sweep_photon_number(order, r_grid, &[lo, hi], DEFAULT_TOL)?;
    ConvergedRegion::from_sweep(&sweep, levels, leak_tol, agree_tol)
}

impl ConvergedRegion {
    /// Builds the region from a sweep that contains both truncations.
    pub fn from_sweep(sweep: &SweepResult, levels: (usize, usize), leak_tol: f64, agree_tol: f64) -> Result<Self> {
        if levels.0 == levels.1 {
            return Err(Error::InvalidArgument("truncation pair must be distinct".into()));
        }
        let a = sweep.curve(levels.0);
        let b = sweep.curve(levels.1);
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "sweep does not hold matching curves for N = {} and N = {}",
                levels.0, levels.1
            )));
        }
        let points: Vec<PairPoint> = a
            .iter()
            .zip(&b)
            .map(|(ra, rb)| {
                let converged = ra.status.is_ok()
                    && rb.status.is_ok()
                    && ra.leakage < leak_tol
                    && rb.leakage < leak_tol
                    && relative_difference(ra.mean_photon, rb.mean_photon) < agree_tol;
                PairPoint {
                    r: ra.r,
                    mean_a: ra.mean_photon,
                    mean_b: rb.mean_photon,
                    leakage_a: ra.leakage,
                    leakage_b: rb.leakage,
                    converged,
                }
            })
            .collect();
        let mut region = ConvergedRegion { order: sweep.order, levels, r_max: 0.0, points };
        region.r_max = region.certified().last().map_or(0.0, |p| p.r);
        Ok(region)
    }
}

/// Largest grid `r` such that every grid point up to it is converged at both
/// truncations.
pub fn converged_region(
    order: u32,
    levels: (usize, usize),
    r_grid: &[f64],
    leak_tol: f64,
    agree_tol: f64,
) -> Result<f64> {
    Ok(converged_region_scan(order, levels, r_grid, leak_tol, agree_tol)?.r_max)
}

/// Photon number of `exp(r a^dag^n - r^* a^n)|0>` at each `arg(r)` in
/// `phases`, for fixed `|r|`.
pub fn phase_scan(order: u32, modulus: f64, dim: FockDim, phases: &[f64], tol: f64) -> Result<Vec<f64>> {
    phases
        .iter()
        .map(|&theta| {
            let params = SqueezeParams::new(order, Complex64::from_polar(modulus, theta))?;
            squeezed_state(&params, dim, tol).map(|psi| mean_photon(&psi))
        })
        .collect()
}

/// Phases used by the phase-invariance check: `0, pi/4, pi/2`.
pub const PHASE_SAMPLES: [f64; 3] = [0.0, PI / 4.0, PI / 2.0];

/// Regular grid `start, start + step, ...` up to `stop` inclusive (within
/// half a step of rounding).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || start < 0.0 || stop < start {
        return Err(Error::InvalidArgument(format!("invalid grid {start}:{stop}:{step}")));
    }
    if stop == start {
        return Ok(vec![start]);
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}
