//! Truncated single-mode Fock space: ladder operators, the generalized
//! squeezing generator and the diagonal commutator `[a^n, a^dag^n]`.
//!
//! Operators are stored by diagonal offset. Offset `d` holds the entries
//! `(row, row + d)`; every operator used here has a handful of populated
//! diagonals so storage and matrix-vector products are `O(N)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::combinatorics::{commutator_closed_form, ladder_factor};
use crate::error::{Error, Result};

/// Number of retained Fock levels, `|0> .. |N-1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockDim(usize);

impl FockDim {
    pub fn new(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidArgument(format!(
                "Fock truncation must keep at least 2 levels, got {levels}"
            )));
        }
        Ok(FockDim(levels))
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0
    }

    /// Checks the truncation is large enough for squeezing order `order`.
    pub fn check_order(self, order: u32) -> Result<()> {
        if self.0 <= order as usize {
            return Err(Error::InvalidArgument(format!(
                "truncation N = {} must exceed squeezing order n = {order}",
                self.0
            )));
        }
        Ok(())
    }
}

/// Order `n` and complex amplitude `r` of `exp(r a^dag^n - r^* a^n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    order: u32,
    r: Complex64,
}

impl SqueezeParams {
    pub fn new(order: u32, r: Complex64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("squeezing order must be >= 1".into()));
        }
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(Error::InvalidArgument(format!("squeezing parameter {r} is not finite")));
        }
        Ok(SqueezeParams { order, r })
    }

    pub fn real(order: u32, r: f64) -> Result<Self> {
        Self::new(order, Complex64::new(r, 0.0))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn r(&self) -> Complex64 {
        self.r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: FockDim,
    diagonals: BTreeMap<i64, Vec<Complex64>>,
}

impl SparseOperator {
    pub fn zeros(dim: FockDim) -> Self {
        SparseOperator { dim, diagonals: BTreeMap::new() }
    }

    pub fn identity(dim: FockDim) -> Self {
        let mut op = Self::zeros(dim);
        op.diagonals.insert(0, vec![Complex64::new(1.0, 0.0); dim.size()]);
        op
    }

    /// Builds an operator from explicit diagonals. Each vector for offset `d`
    /// must have length `N - |d|`; element `j` is entry `(j, j + d)` for
    /// `d >= 0` and `(j - d, j)` for `d < 0`.
    pub fn from_diagonals(dim: FockDim, diagonals: BTreeMap<i64, Vec<Complex64>>) -> Result<Self> {
        let n = dim.size();
        for (&d, values) in &diagonals {
            let expected = n.checked_sub(d.unsigned_abs() as usize).filter(|&l| l > 0);
            match expected {
                Some(len) if len == values.len() => {}
                Some(len) => {
                    return Err(Error::DimensionMismatch { expected: len, actual: values.len() })
                }
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "offset {d} lies outside an {n}-level operator"
                    )))
                }
            }
        }
        let mut op = SparseOperator { dim, diagonals };
        op.prune();
        Ok(op)
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    /// Populated diagonal offsets, ascending.
    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        self.diagonals.keys().copied()
    }

    pub fn diagonal_at(&self, offset: i64) -> Option<&[Complex64]> {
        self.diagonals.get(&offset).map(|v| v.as_slice())
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let d = col as i64 - row as i64;
        match self.diagonals.get(&d) {
            Some(values) => values[row.min(col)],
            None => Complex64::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.diagonals.is_empty()
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonals.keys().all(|&d| d == 0)
    }

    /// Real parts of the main diagonal, rejecting operators with off-diagonal
    /// entries.
    pub fn real_diagonal(&self) -> Result<Vec<f64>> {
        if let Some(&offset) = self.diagonals.keys().find(|&&d| d != 0) {
            return Err(Error::NotDiagonal { offset });
        }
        Ok(match self.diagonals.get(&0) {
            Some(values) => values.iter().map(|z| z.re).collect(),
            None => vec![0.0; self.dim.size()],
        })
    }

    pub fn adjoint(&self) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .map(|(&d, values)| (-d, values.iter().map(|z| z.conj()).collect()))
            .collect();
        SparseOperator { dim: self.dim, diagonals }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .map(|(&d, values)| (d, values.iter().map(|z| z * factor).collect()))
            .collect();
        let mut op = SparseOperator { dim: self.dim, diagonals };
        op.prune();
        op
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, sign: Complex64) -> Result<Self> {
        self.check_same_dim(other)?;
        let mut diagonals = self.diagonals.clone();
        for (&d, values) in &other.diagonals {
            let target = diagonals
                .entry(d)
                .or_insert_with(|| vec![Complex64::zero(); values.len()]);
            for (t, v) in target.iter_mut().zip(values) {
                *t += sign * v;
            }
        }
        let mut op = SparseOperator { dim: self.dim, diagonals };
        op.prune();
        Ok(op)
    }

    /// Matrix product `self * other` on the truncated space.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim.size() as i64;
        let mut diagonals: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
        for (&d1, a) in &self.diagonals {
            for (&d2, b) in &other.diagonals {
                let d = d1 + d2;
                if d.abs() >= n {
                    continue;
                }
                let target = diagonals
                    .entry(d)
                    .or_insert_with(|| vec![Complex64::zero(); (n - d.abs()) as usize]);
                // (AB)_{i, i+d} += A_{i, i+d1} B_{i+d1, i+d}
                let lo = 0.max(-d1).max(-d);
                let hi = n.min(n - d1).min(n - d);
                for i in lo..hi {
                    let mid = i + d1;
                    let a_ij = a[i.min(mid) as usize];
                    let b_jk = b[mid.min(i + d) as usize];
                    target[i.min(i + d) as usize] += a_ij * b_jk;
                }
            }
        }
        let mut op = SparseOperator { dim: self.dim, diagonals };
        op.prune();
        Ok(op)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut y = vec![Complex64::zero(); x.len()];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = self * x`, overwriting `y`.
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) -> Result<()> {
        let n = self.dim.size();
        if x.len() != n || y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: x.len().min(y.len()) });
        }
        y.iter_mut().for_each(|v| *v = Complex64::zero());
        for (&d, values) in &self.diagonals {
            let s = d.unsigned_abs() as usize;
            if d >= 0 {
                for (j, v) in values.iter().enumerate() {
                    y[j] += v * x[j + s];
                }
            } else {
                for (j, v) in values.iter().enumerate() {
                    y[j + s] += v * x[j];
                }
            }
        }
        Ok(())
    }

    /// Row-major dense copy, for small-N checks.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dim.size();
        let mut out = vec![Complex64::zero(); n * n];
        for (&d, values) in &self.diagonals {
            for (j, v) in values.iter().enumerate() {
                let (row, col) = if d >= 0 { (j, j + d as usize) } else { (j + (-d) as usize, j) };
                out[row * n + col] = *v;
            }
        }
        out
    }

    /// Largest entry of `|K + K^dagger|`.
    pub fn anti_hermitian_deviation(&self) -> f64 {
        let sum = self.add(&self.adjoint()).expect("same dimension");
        sum.diagonals
            .values()
            .flat_map(|v| v.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest absolute row sum; an upper bound on the spectral norm for the
    /// anti-Hermitian operators handled here.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim.size();
        let mut rows = vec![0.0; n];
        for (&d, values) in &self.diagonals {
            for (j, v) in values.iter().enumerate() {
                let row = if d >= 0 { j } else { j + (-d) as usize };
                rows[row] += v.norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.size(),
                actual: other.dim.size(),
            });
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.diagonals.retain(|_, v| v.iter().any(|z| !z.is_zero()));
    }
}

/// Annihilation operator: entry `(k-1, k) = sqrt(k)`.
pub fn annihilation_matrix(dim: FockDim) -> SparseOperator {
    ladder_power(dim, 1)
}

pub fn creation_matrix(dim: FockDim) -> SparseOperator {
    annihilation_matrix(dim).adjoint()
}

/// `a^n` with each element `sqrt(k!/(k-n)!)` formed from an exact integer
/// product.
pub fn ladder_power(dim: FockDim, n: u32) -> SparseOperator {
    let size = dim.size();
    let n = n as usize;
    if n == 0 {
        return SparseOperator::identity(dim);
    }
    let mut op = SparseOperator::zeros(dim);
    if n < size {
        let values = (n..size)
            .map(|k| Complex64::new(ladder_factor(k as u64, n as u64), 0.0))
            .collect();
        op.diagonals.insert(n as i64, values);
    }
    op
}

/// Integer matrix power by repeated squaring.
pub fn power(op: &SparseOperator, n: u32) -> SparseOperator {
    let mut result = SparseOperator::identity(op.dim());
    let mut base = op.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.matmul(&base).expect("same dimension");
        }
        e >>= 1;
        if e > 0 {
            base = base.matmul(&base).expect("same dimension");
        }
    }
    result
}

pub fn number_operator(dim: FockDim) -> SparseOperator {
    let mut op = SparseOperator::zeros(dim);
    op.diagonals
        .insert(0, (0..dim.size()).map(|m| Complex64::new(m as f64, 0.0)).collect());
    op.prune();
    op
}

/// Exponent `K = r a^dag^n - r^* a^n` of the generalized squeezing operator.
pub fn generator(params: &SqueezeParams, dim: FockDim) -> Result<SparseOperator> {
    dim.check_order(params.order())?;
    let n = params.order() as usize;
    let r = params.r();
    let mut op = SparseOperator::zeros(dim);
    if r.is_zero() {
        return Ok(op);
    }
    let ladder: Vec<f64> = (n..dim.size()).map(|k| ladder_factor(k as u64, n as u64)).collect();
    op.diagonals.insert(-(n as i64), ladder.iter().map(|&f| r * f).collect());
    op.diagonals.insert(n as i64, ladder.iter().map(|&f| -r.conj() * f).collect());
    Ok(op)
}

/// Diagonal operator `[a^n, a^dag^n]` evaluated from its closed-form sum.
///
/// Entries are exact integers rounded once to `f64`.
pub fn a_n_commutator_closed_form(n: u32, dim: FockDim) -> Result<SparseOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("commutator order must be >= 1".into()));
    }
    let values = (0..dim.size())
        .map(|m| {
            let v = commutator_closed_form(n as u64, m as u64);
            Complex64::new(v.to_f64().unwrap_or(f64::INFINITY), 0.0)
        })
        .collect();
    let mut diagonals = BTreeMap::new();
    diagonals.insert(0, values);
    SparseOperator::from_diagonals(dim, diagonals)
}
