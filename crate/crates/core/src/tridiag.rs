//! Symmetric tridiagonal eigensolver (implicit QL with Wilkinson-style shifts).

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigen-decomposition `S = Q diag(values) Q^T` of a real symmetric
/// tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// Row-major, row `j` is the unit eigenvector for `values[j]`.
    pub vectors: Vec<f64>,
    size: usize,
}

impl TridiagEigen {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.size..(j + 1) * self.size]
    }
}

/// Decomposes the matrix with main diagonal `diag` and sub/super-diagonal
/// `offdiag` (`offdiag.len() == diag.len() - 1`).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, actual: offdiag.len() });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(Error::EigenFailure { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_rows(&mut z, n, i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(TridiagEigen { values: d, vectors: z, size: n })
}

/// Applies the plane rotation to eigenvector rows `i` and `i + 1`.
#[inline]
fn rotate_rows(z: &mut [f64], n: usize, i: usize, c: f64, s: f64) {
    let (head, tail) = z.split_at_mut((i + 1) * n);
    let lo = &mut head[i * n..];
    let hi = &mut tail[..n];
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(eig: &TridiagEigen, i: usize, j: usize) -> f64 {
        (0..eig.size()).map(|k| eig.values[k] * eig.vector(k)[i] * eig.vector(k)[j]).sum()
    }

    #[test]
    fn two_by_two() {
        let eig = symmetric_tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        let mut vals = eig.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0).abs() < 1e-15);
        assert!((vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_entry() {
        let eig = symmetric_tridiagonal_eigen(&[3.5], &[]).unwrap();
        assert_eq!(eig.values, vec![3.5]);
        assert_eq!(eig.vectors, vec![1.0]);
    }

    #[test]
    fn reconstructs_and_is_orthonormal() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let off: Vec<f64> = (1..n).map(|i| ((i as f64) * (i as f64 + 1.0)).sqrt()).collect();
        let eig = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j {
                    diag[i]
                } else if i + 1 == j {
                    off[i]
                } else if j + 1 == i {
                    off[j]
                } else {
                    0.0
                };
                assert!((reconstruct(&eig, i, j) - expected).abs() < 1e-11, "({i},{j})");
                let dot: f64 = (0..n).map(|k| eig.vector(i)[k] * eig.vector(j)[k]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((dot - delta).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(symmetric_tridiagonal_eigen(&[], &[]).is_err());
        assert!(symmetric_tridiagonal_eigen(&[1.0, 2.0], &[]).is_err());
    }
}
