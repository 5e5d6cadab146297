//! Independent reference implementations for the integration tests. Nothing
//! here calls into the library's numerics.
#![allow(dead_code)]

use num_complex::Complex64;

pub type Dense = Vec<Vec<Complex64>>;

pub fn zeros(n: usize) -> Dense {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

pub fn identity(n: usize) -> Dense {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// Dense `a`: `a|k> = sqrt(k)|k-1>`, built by plain floating products.
pub fn annihilation(n: usize) -> Dense {
    let mut m = zeros(n);
    for k in 1..n {
        m[k - 1][k] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    m
}

pub fn dagger(a: &Dense) -> Dense {
    let n = a.len();
    let mut m = zeros(n);
    for i in 0..n {
        for j in 0..n {
            m[j][i] = a[i][j].conj();
        }
    }
    m
}

pub fn mat_power(a: &Dense, p: u32) -> Dense {
    let mut out = identity(a.len());
    for _ in 0..p {
        out = matmul(&out, a);
    }
    out
}

/// `r a^dag^n - r^* a^n` as a dense matrix.
pub fn dense_generator(order: u32, r: Complex64, n: usize) -> Dense {
    let an = mat_power(&annihilation(n), order);
    let adn = dagger(&an);
    let mut k = zeros(n);
    for i in 0..n {
        for j in 0..n {
            k[i][j] = r * adn[i][j] - r.conj() * an[i][j];
        }
    }
    k
}

fn one_norm(a: &Dense) -> f64 {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i][j].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(A)` by scaling, a 30-term Taylor series and repeated squaring.
pub fn dense_expm(a: &Dense) -> Dense {
    let n = a.len();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let scaled: Dense = a.iter().map(|row| row.iter().map(|z| z * scale).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=30 {
        term = matmul(&term, &scaled);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z *= inv;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// First column of `exp(K)`, i.e. `exp(K)|0>`.
pub fn dense_vacuum_evolution(order: u32, r: Complex64, n: usize) -> Vec<Complex64> {
    let e = dense_expm(&dense_generator(order, r, n));
    (0..n).map(|i| e[i][0]).collect()
}

pub fn vec_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `<a^dag a>` of a displaced vacuum: `r^2`.
pub fn displacement_photons(r: f64) -> f64 {
    r * r
}

/// `<a^dag a>` of a two-photon squeezed vacuum: `sinh^2(2r)`.
pub fn two_photon_photons(r: f64) -> f64 {
    (2.0 * r).sinh().powi(2)
}

/// `<m|[a^n, a^dag^n]|m> = (m+1)...(m+n) - m(m-1)...(m-n+1)`.
pub fn commutator_diagonal(n: u64, m: u64) -> u128 {
    let rising: u128 = (1..=n).map(|j| (m + j) as u128).product();
    let falling: u128 = if m >= n { (0..n).map(|j| (m - j) as u128).product() } else { 0 };
    rising - falling
}
