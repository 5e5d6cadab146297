//! Exact integer helpers shared by the operator builders and the algebra engine.

use num_bigint::BigInt;
use num_traits::One;

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `m (m-1) ... (m-len+1)`, i.e. the product of `(m - j)` for `j < len`.
/// Vanishes once a factor reaches zero; never negative for integer `m >= 0`.
pub fn falling(m: u64, len: u64) -> BigInt {
    if len > m {
        return BigInt::from(0);
    }
    (0..len).fold(BigInt::one(), |acc, j| acc * (m - j))
}

/// Ladder factor `sqrt(k! / (k-n)!)`, the matrix element of `a^n` between
/// `|k>` and `|k-n>`. The integer product is formed exactly before the root.
pub fn ladder_factor(k: u64, n: u64) -> f64 {
    if n > k {
        return 0.0;
    }
    let mut prod: u128 = 1;
    for j in 0..n {
        match prod.checked_mul((k - j) as u128) {
            Some(p) => prod = p,
            None => {
                // Out of u128 range: fall back to a sum of logarithms.
                let log: f64 = (0..n).map(|j| ((k - j) as f64).ln()).sum();
                return (0.5 * log).exp();
            }
        }
    }
    (prod as f64).sqrt()
}

/// Diagonal entry of `[a^n, a^dag^n]` on level `m`:
/// `sum_{k=1}^{n} k! C(n,k)^2 prod_{j=0}^{n-k-1} (m - j)`.
pub fn commutator_closed_form(n: u64, m: u64) -> BigInt {
    (1..=n)
        .map(|k| {
            let c = binomial(n, k);
            factorial(k) * &c * &c * falling(m, n - k)
        })
        .fold(BigInt::from(0), |acc, t| acc + t)
}
