//! Action of `exp(K)` on a state for anti-Hermitian banded `K`.
//!
//! Two routes are provided:
//!
//! * **chain spectral**: when `K` only populates the diagonals `{-d, 0, d}`
//!   it splits into `d` independent tridiagonal chains (levels congruent mod
//!   `d`). `i K` restricted to a chain is Hermitian tridiagonal and is
//!   diagonalized exactly after a diagonal phase gauge, so the action is
//!   accurate to roundoff for any `|K|`. The squeezing generator always has
//!   this shape.
//! * **Krylov**: Arnoldi projection with adaptive sub-stepping for any other
//!   anti-Hermitian banded operator.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::state::StateVector;
use crate::tridiag::{symmetric_tridiagonal_eigen, TridiagEigen};

/// Relative tolerance for accepting an operator as anti-Hermitian.
const ANTI_HERMITIAN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { tol: 1e-12, krylov_dim: 30, max_steps: 200_000 }
    }
}

/// Returns `exp(K) v`.
///
/// `tol` bounds the error of the Krylov route; the chain-spectral route is
/// exact up to roundoff and only validates it. Fails with
/// [`Error::NonConvergence`] rather than returning an unconverged vector.
pub fn apply_exp_generator(k: &SparseOperator, v: &StateVector, tol: f64) -> Result<StateVector> {
    validate(k, v, tol)?;
    if k.is_zero() {
        return Ok(v.clone());
    }
    match chain_step(k) {
        Some(step) => apply_exp_chain(k, v, step),
        None => apply_exp_krylov(k, v, &KrylovOptions { tol, ..KrylovOptions::default() }),
    }
}

fn validate(k: &SparseOperator, v: &StateVector, tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if k.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim().size(), actual: v.dim().size() });
    }
    let deviation = k.anti_hermitian_deviation();
    if deviation > ANTI_HERMITIAN_SLACK * k.norm_inf().max(1.0) {
        return Err(Error::NotAntiHermitian { deviation });
    }
    if v.norm_error() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "input state must be normalized (|norm - 1| = {:e})",
            v.norm_error()
        )));
    }
    Ok(())
}

/// The chain stride `d` if only offsets in `{-d, 0, d}` are populated.
fn chain_step(k: &SparseOperator) -> Option<usize> {
    let mut step = None;
    for offset in k.offsets() {
        if offset == 0 {
            continue;
        }
        let s = offset.unsigned_abs() as usize;
        match step {
            None => step = Some(s),
            Some(prev) if prev == s => {}
            Some(_) => return None,
        }
    }
    // A purely diagonal operator is a set of one-level chains.
    Some(step.unwrap_or(k.dim().size()))
}

fn apply_exp_chain(k: &SparseOperator, v: &StateVector, step: usize) -> Result<StateVector> {
    let n = k.dim().size();
    let amps = v.amplitudes();
    let mut out = vec![Complex64::zero(); n];
    for residue in 0..step.min(n) {
        let levels: Vec<usize> = (residue..n).step_by(step).collect();
        if levels.iter().all(|&l| amps[l].is_zero()) {
            continue;
        }
        let chain = ChainSpectrum::from_operator(k, levels)?;
        let input: Vec<Complex64> = chain.levels.iter().map(|&l| amps[l]).collect();
        let evolved = chain.evolve(1.0, &input);
        for (&l, z) in chain.levels.iter().zip(evolved) {
            out[l] = z;
        }
    }
    StateVector::from_amplitudes(k.dim(), out)
}

/// Spectral decomposition of one invariant chain of an anti-Hermitian
/// tridiagonal-by-stride operator. `exp(tK)` on the chain is
/// `D Q exp(-i t L) Q^T D^*` with `D` a diagonal phase gauge.
#[derive(Debug, Clone)]
pub struct ChainSpectrum {
    levels: Vec<usize>,
    gauge: Vec<Complex64>,
    eigen: TridiagEigen,
}

impl ChainSpectrum {
    /// Restricts `k` to the Fock levels in `levels` (consecutive entries one
    /// stride apart) and diagonalizes it.
    pub fn from_operator(k: &SparseOperator, levels: Vec<usize>) -> Result<Self> {
        let len = levels.len();
        // S = i K is Hermitian: S_ii = -Im K_ii, S_{i+1,i} = i K_{i+1,i}.
        let diag: Vec<f64> = levels.iter().map(|&l| -k.get(l, l).im).collect();
        let mut gauge = Vec::with_capacity(len);
        let mut offdiag = Vec::with_capacity(len.saturating_sub(1));
        let mut phase = 0.0;
        gauge.push(Complex64::new(1.0, 0.0));
        for pair in levels.windows(2) {
            let s = Complex64::i() * k.get(pair[1], pair[0]);
            offdiag.push(s.norm());
            if !s.is_zero() {
                phase += s.arg();
            }
            gauge.push(Complex64::from_polar(1.0, phase));
        }
        let eigen = symmetric_tridiagonal_eigen(&diag, &offdiag)?;
        Ok(ChainSpectrum { levels, gauge, eigen })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// `exp(t K) u` for `u` given in chain coordinates.
    pub fn evolve(&self, t: f64, input: &[Complex64]) -> Vec<Complex64> {
        let len = self.levels.len();
        let gauged: Vec<(usize, Complex64)> = input
            .iter()
            .zip(&self.gauge)
            .enumerate()
            .filter(|(_, (u, _))| !u.is_zero())
            .map(|(i, (u, g))| (i, u * g.conj()))
            .collect();

        let mut out = vec![Complex64::zero(); len];
        for (j, &lambda) in self.eigen.values.iter().enumerate() {
            let q = self.eigen.vector(j);
            let mut c = Complex64::zero();
            for &(i, u) in &gauged {
                c += u * q[i];
            }
            if c.is_zero() {
                continue;
            }
            c *= Complex64::from_polar(1.0, -t * lambda);
            for (o, &qi) in out.iter_mut().zip(q) {
                *o += c * qi;
            }
        }
        for (o, g) in out.iter_mut().zip(&self.gauge) {
            *o *= g;
        }
        out
    }
}

/// Arnoldi-projected `exp(K) v` with adaptive step control.
pub fn apply_exp_krylov(k: &SparseOperator, v: &StateVector, opts: &KrylovOptions) -> Result<StateVector> {
    validate(k, v, opts.tol)?;
    let n = k.dim().size();
    let m_max = opts.krylov_dim.clamp(1, n);
    let anorm = k.norm_inf();
    if anorm == 0.0 {
        return Ok(v.clone());
    }

    let mut w = v.amplitudes().to_vec();
    let mut t = 0.0;
    let mut tau = (0.5 * m_max as f64 / anorm).min(1.0);
    let mut steps = 0;
    let mut last_err = f64::INFINITY;

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
    let mut scratch = vec![Complex64::zero(); n];

    while t < 1.0 {
        let beta = norm(&w);
        if beta == 0.0 {
            break;
        }

        // Arnoldi with two passes of modified Gram-Schmidt.
        basis.clear();
        basis.push(w.iter().map(|z| z / beta).collect());
        let mut h = vec![Complex64::zero(); (m_max + 1) * m_max];
        let mut m = m_max;
        let mut breakdown = false;
        let mut h_next = 0.0;
        for j in 0..m_max {
            k.matvec_into(&basis[j], &mut scratch)?;
            for _pass in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let proj = dot(q, &scratch);
                    h[i * m_max + j] += proj;
                    for (s, qi) in scratch.iter_mut().zip(q) {
                        *s -= proj * qi;
                    }
                }
            }
            h_next = norm(&scratch);
            if h_next <= 1e-13 * anorm {
                m = j + 1;
                breakdown = true;
                break;
            }
            h[(j + 1) * m_max + j] = Complex64::new(h_next, 0.0);
            if j + 1 < m_max {
                basis.push(scratch.iter().map(|z| z / h_next).collect());
            }
        }

        let (expo, err) = loop {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NonConvergence { steps, residual: last_err });
            }
            tau = tau.min(1.0 - t);
            let mut small = vec![Complex64::zero(); m * m];
            for i in 0..m {
                for j in 0..m {
                    small[i * m + j] = h[i * m_max + j] * tau;
                }
            }
            let e = dense_expm(&small, m);
            let err = if breakdown { 0.0 } else { beta * h_next * tau * e[(m - 1) * m].norm() };
            last_err = err;
            if err <= opts.tol * tau {
                break (e, err);
            }
            let shrink = 0.9 * (opts.tol * tau / err).powf(1.0 / m as f64);
            tau *= shrink.clamp(0.1, 0.5);
            if tau < 1e-14 {
                return Err(Error::NonConvergence { steps, residual: err });
            }
        };

        for (idx, wi) in w.iter_mut().enumerate() {
            let mut acc = Complex64::zero();
            for (j, q) in basis.iter().take(m).enumerate() {
                acc += expo[j * m] * q[idx];
            }
            *wi = acc * beta;
        }
        t += tau;
        tau = if err == 0.0 {
            1.0 - t
        } else {
            tau * (0.9 * (opts.tol * tau / err).powf(1.0 / m as f64)).clamp(0.2, 2.0)
        };
    }
    StateVector::from_amplitudes(k.dim(), w)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scaling-and-squaring Taylor exponential of a small row-major matrix.
fn dense_expm(a: &[Complex64], m: usize) -> Vec<Complex64> {
    let one_norm = (0..m)
        .map(|j| (0..m).map(|i| a[i * m + j].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if one_norm > 0.5 { (one_norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let scaled: Vec<Complex64> = a.iter().map(|z| z * scale).collect();

    let mut result = identity(m);
    let mut term = identity(m);
    for order in 1..=30 {
        term = matmul(&term, &scaled, m);
        let inv = 1.0 / order as f64;
        term.iter_mut().for_each(|z| *z *= inv);
        let size = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (r, t) in result.iter_mut().zip(&term) {
            *r += t;
        }
        if size < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, m);
    }
    result
}

fn identity(m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); m * m];
    for i in 0..m {
        out[i * m + i] = Complex64::new(1.0, 0.0);
    }
    out
}

fn matmul(a: &[Complex64], b: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); m * m];
    for i in 0..m {
        for l in 0..m {
            let ail = a[i * m + l];
            if ail.is_zero() {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += ail * b[l * m + j];
            }
        }
    }
    out
}
