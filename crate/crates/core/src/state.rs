use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{FockDim, SparseOperator};

/// Complex amplitudes over the Fock levels `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: FockDim,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn vacuum(dim: FockDim) -> Self {
        Self::basis(dim, 0).expect("level 0 always exists")
    }

    /// Number state `|level>`.
    pub fn basis(dim: FockDim, level: usize) -> Result<Self> {
        if level >= dim.size() {
            return Err(Error::InvalidArgument(format!(
                "level {level} outside an {}-level truncation",
                dim.size()
            )));
        }
        let mut amplitudes = vec![Complex64::zero(); dim.size()];
        amplitudes[level] = Complex64::new(1.0, 0.0);
        Ok(StateVector { dim, amplitudes })
    }

    pub fn from_amplitudes(dim: FockDim, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dim.size() {
            return Err(Error::DimensionMismatch { expected: dim.size(), actual: amplitudes.len() });
        }
        Ok(StateVector { dim, amplitudes })
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|z| z.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.probabilities().sum::<f64>().sqrt()
    }

    /// `|norm - 1|`.
    pub fn norm_error(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim.size(), actual: other.dim.size() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

/// `<v| a^dag a |v> = sum_m m |v_m|^2`.
pub fn mean_photon(v: &StateVector) -> f64 {
    v.probabilities().enumerate().map(|(m, p)| m as f64 * p).sum()
}

/// `sum_m op_mm |v_m|^2` for a diagonal operator.
pub fn expectation_diagonal(op: &SparseOperator, v: &StateVector) -> Result<f64> {
    if op.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim().size(), actual: v.dim().size() });
    }
    let diag = op.real_diagonal()?;
    Ok(diag.iter().zip(v.probabilities()).map(|(d, p)| d * p).sum())
}

/// Probability weight in the top `tail` levels.
pub fn leakage(v: &StateVector, tail: usize) -> Result<f64> {
    let n = v.dim().size();
    if tail == 0 || tail >= n {
        return Err(Error::InvalidArgument(format!("leakage tail must lie in 1..{n}, got {tail}")));
    }
    Ok(v.probabilities().skip(n - tail).sum())
}
