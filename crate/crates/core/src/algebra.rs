//! Exact algebra of normal-ordered single-mode boson polynomials.
//!
//! A polynomial is a finite sum of monomials `a^dag^p a^q` with rational
//! coefficients. Products are reordered with Wick's theorem
//!
//! ```text
//! (a^dag^p a^q)(a^dag^p' a^q') = sum_k k! C(q,k) C(p',k) a^dag^(p+p'-k) a^(q+q'-k)
//! ```
//!
//! so the normal-ordered basis is closed under multiplication.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::{binomial, commutator_closed_form, factorial, falling};
use crate::error::{Error, Result};

/// Monomial key `(p, q)` for `a^dag^p a^q`.
pub type Monomial = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalOrderedPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl NormalOrderedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, BigRational::one())
    }

    pub fn monomial(p: u32, q: u32, coeff: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((p, q), coeff);
        }
        NormalOrderedPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(terms: I) -> Self {
        let mut poly = Self::zero();
        for (key, c) in terms {
            poly.add_term(key, c);
        }
        poly
    }

    /// `a^dag^n`.
    pub fn creation_power(n: u32) -> Self {
        Self::monomial(n, 0, BigRational::one())
    }

    /// `a^n`.
    pub fn annihilation_power(n: u32) -> Self {
        Self::monomial(0, n, BigRational::one())
    }

    /// `a^dag a`.
    pub fn number() -> Self {
        Self::monomial(1, 1, BigRational::one())
    }

    /// Squeezing direction `a^dag^n - a^n`.
    pub fn squeeze_direction(n: u32) -> Self {
        Self::creation_power(n).sub(&Self::annihilation_power(n))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: u32, q: u32) -> BigRational {
        self.terms.get(&(p, q)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Largest `p + q` among the terms, 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(p, q)| p + q).max().unwrap_or(0)
    }

    fn add_term(&mut self, key: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, -c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        NormalOrderedPoly { terms: self.terms.iter().map(|(&k, c)| (k, c * factor)).collect() }
    }

    /// Normal-ordered product `self * other`.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        let mut contractions = ContractionTable::default();
        for (&(p, q), c) in &self.terms {
            for (&(p2, q2), d) in &other.terms {
                let cd = c * d;
                for k in 0..=q.min(p2) {
                    let weight = contractions.get(q, p2, k);
                    out.add_term((p + p2 - k, q + q2 - k), &cd * BigRational::from_integer(weight));
                }
            }
        }
        out
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.multiply(other).sub(&other.multiply(self))
    }

    /// `<0| P |0>`: only the constant term survives.
    pub fn vacuum_expectation(&self) -> BigRational {
        self.coefficient(0, 0)
    }

    /// `<m| P |m> = sum_p c_{p,p} m!/(m-p)!`.
    pub fn diagonal_on_number_state(&self, level: u64) -> BigRational {
        self.terms
            .iter()
            .filter(|((p, q), _)| p == q)
            .map(|(&(p, _), c)| c * BigRational::from_integer(falling(level, p as u64)))
            .fold(BigRational::zero(), |acc, t| acc + t)
    }

    /// `<row| P |col>` in floating point.
    pub fn matrix_element(&self, row: u64, col: u64) -> f64 {
        self.terms
            .iter()
            .filter(|((p, q), _)| col >= *q as u64 && col - *q as u64 + *p as u64 == row)
            .map(|(&(p, q), c)| {
                // a^q |col> = sqrt(col!/mid!) |mid>, a^dag^p |mid> = sqrt(row!/mid!) |row>
                let lowered = crate::combinatorics::ladder_factor(col, q as u64);
                let raised = crate::combinatorics::ladder_factor(row, p as u64);
                rational_to_f64(c) * lowered * raised
            })
            .sum()
    }

    /// Formal adjoint: `(a^dag^p a^q)^dag = a^dag^q a^p`.
    pub fn adjoint(&self) -> Self {
        NormalOrderedPoly { terms: self.terms.iter().map(|(&(p, q), c)| ((q, p), c.clone())).collect() }
    }
}

impl fmt::Display for NormalOrderedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(p, q), c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mono = match (p, q) {
                (0, 0) => String::new(),
                (p, 0) => power_str("a+", p),
                (0, q) => power_str("a", q),
                (p, q) => format!("{} {}", power_str("a+", p), power_str("a", q)),
            };
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{mag} {mono}")?,
            }
        }
        Ok(())
    }
}

fn power_str(base: &str, e: u32) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

/// Memoized `k! C(q,k) C(p',k)`.
#[derive(Default)]
struct ContractionTable {
    cache: BTreeMap<(u32, u32, u32), BigInt>,
}

impl ContractionTable {
    fn get(&mut self, q: u32, p: u32, k: u32) -> BigInt {
        self.cache
            .entry((q, p, k))
            .or_insert_with(|| factorial(k as u64) * binomial(q as u64, k as u64) * binomial(p as u64, k as u64))
            .clone()
    }
}

/// Resource limits for nested commutators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgebraBudget {
    pub max_degree: u32,
    pub max_terms: usize,
}

impl Default for AlgebraBudget {
    fn default() -> Self {
        AlgebraBudget { max_degree: 1024, max_terms: 2_000_000 }
    }
}

/// `[A, B]_m` with `A = a^dag^n - a^n` and `B = a^dag a`.
pub fn nested_commutator(n: u32, m: u32) -> Result<NormalOrderedPoly> {
    nested_commutator_with(n, m, &AlgebraBudget::default())
}

pub fn nested_commutator_with(n: u32, m: u32, budget: &AlgebraBudget) -> Result<NormalOrderedPoly> {
    if n == 0 {
        return Err(Error::InvalidArgument("squeezing order must be >= 1".into()));
    }
    let expected = nested_degree(n, m);
    if expected > budget.max_degree as u64 {
        return Err(Error::Budget {
            parameter: "degree",
            value: expected as usize,
            limit: budget.max_degree as usize,
        });
    }
    let a = NormalOrderedPoly::squeeze_direction(n);
    let mut current = NormalOrderedPoly::number();
    for _ in 0..m {
        current = a.commutator(&current);
        check_terms(&current, budget)?;
    }
    Ok(current)
}

/// Upper bound on the degree of `[A, B]_m`.
pub fn nested_degree(n: u32, m: u32) -> u64 {
    2 + m as u64 * (n as u64).saturating_sub(2)
}

fn check_terms(p: &NormalOrderedPoly, budget: &AlgebraBudget) -> Result<()> {
    if p.len() > budget.max_terms {
        return Err(Error::Budget { parameter: "terms", value: p.len(), limit: budget.max_terms });
    }
    Ok(())
}

/// Exact Taylor coefficients `c_m` of `<a^dag a>_n = sum_m c_m r^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientSeries {
    pub order: u32,
    /// `(m, c_m)` for every computed power `m = 1..=2M`, ascending.
    pub entries: Vec<(u32, BigRational)>,
}

impl CoefficientSeries {
    pub fn get(&self, m: u32) -> Option<&BigRational> {
        self.entries.iter().find(|(k, _)| *k == m).map(|(_, c)| c)
    }

    pub fn max_power(&self) -> u32 {
        self.entries.last().map_or(0, |(m, _)| *m)
    }

    /// Entries at even powers (the only ones that can be non-zero).
    pub fn even(&self) -> impl Iterator<Item = &(u32, BigRational)> {
        self.entries.iter().filter(|(m, _)| m % 2 == 0)
    }

    pub fn odd(&self) -> impl Iterator<Item = &(u32, BigRational)> {
        self.entries.iter().filter(|(m, _)| m % 2 == 1)
    }

    /// Keeps powers `m <= max_power`.
    pub fn truncated(&self, max_power: u32) -> Self {
        CoefficientSeries {
            order: self.order,
            entries: self.entries.iter().filter(|(m, _)| *m <= max_power).cloned().collect(),
        }
    }
}

/// Coefficients for the first `count` even powers `m = 2, 4, ..., 2 count`
/// (odd powers are computed as well and come out exactly zero).
pub fn coefficients(n: u32, count: u32) -> Result<CoefficientSeries> {
    coefficients_with(n, count, &AlgebraBudget::default())
}

pub fn coefficients_with(n: u32, count: u32, budget: &AlgebraBudget) -> Result<CoefficientSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument("squeezing order must be >= 1".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("coefficient count M must be >= 1".into()));
    }
    let top = 2 * count;
    let degree = nested_degree(n, top);
    if degree > budget.max_degree as u64 {
        return Err(Error::Budget { parameter: "M", value: count as usize, limit: max_count(n, budget) });
    }

    let a = NormalOrderedPoly::squeeze_direction(n);
    let mut current = NormalOrderedPoly::number();
    let mut m_factorial = BigInt::one();
    let mut entries = Vec::with_capacity(top as usize);
    for m in 1..=top {
        current = a.commutator(&current);
        // A term of degree d needs at least d / n further commutations to
        // reach the constant monomial; drop those that cannot make it.
        let remaining = (top - m) as u64 * n as u64;
        current.terms.retain(|&(p, q), _| (p + q) as u64 <= remaining);
        if current.len() > budget.max_terms {
            return Err(Error::Budget { parameter: "M", value: count as usize, limit: max_count(n, budget) });
        }
        m_factorial *= m;
        let c = current.vacuum_expectation() / BigRational::from_integer(m_factorial.clone());
        entries.push((m, c));
    }
    Ok(CoefficientSeries { order: n, entries })
}

fn max_count(n: u32, budget: &AlgebraBudget) -> usize {
    if n <= 2 {
        return usize::MAX;
    }
    ((budget.max_degree as u64 - 2) / (2 * (n as u64 - 2))) as usize
}

/// `sum_m c_m r^m` over the computed entries.
pub fn taylor_partial_sum(series: &CoefficientSeries, r: f64) -> f64 {
    series
        .entries
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, c)| rational_to_f64(c) * r.powi(*m as i32))
        .sum()
}

/// `[a^n, a^dag^n]` as a normal-ordered polynomial.
pub fn a_n_commutator(n: u32) -> NormalOrderedPoly {
    NormalOrderedPoly::annihilation_power(n).commutator(&NormalOrderedPoly::creation_power(n))
}

/// Low-order explicit forms in powers of the number operator:
/// `A_1 = 1`, `A_2 = 4N + 2`, `A_3 = 9N^2 + 9N + 6`,
/// `A_4 = 16N^3 + 24N^2 + 56N + 24`.
pub fn explicit_a_n(n: u32, level: u64) -> Option<BigInt> {
    let m = BigInt::from(level);
    let poly: &[i64] = match n {
        1 => &[1],
        2 => &[2, 4],
        3 => &[6, 9, 9],
        4 => &[24, 56, 24, 16],
        _ => return None,
    };
    let mut acc = BigInt::zero();
    for &c in poly.iter().rev() {
        acc = acc * &m + c;
    }
    Some(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelComparison {
    pub level: u64,
    pub symbolic: String,
    pub closed_form: String,
    pub explicit: Option<String>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub order: u32,
    pub levels: Vec<LevelComparison>,
    pub first_mismatch: Option<u64>,
    /// `<0| A_n |0> == n!`.
    pub vacuum_is_factorial: bool,
    /// Symbolic commutator has only diagonal (`p == q`) terms.
    pub diagonal: bool,
}

impl ClosedFormReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none() && self.vacuum_is_factorial && self.diagonal
    }
}

/// Compares the symbolic `[a^n, a^dag^n]` with the closed-form sum (and the
/// explicit low-order forms where known) on number states `0..=max_level`.
pub fn verify_closed_form(n: u32, max_level: u64) -> Result<ClosedFormReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be >= 1".into()));
    }
    let symbolic = a_n_commutator(n);
    let diagonal = symbolic.terms().all(|((p, q), _)| p == q);
    let mut levels = Vec::with_capacity(max_level as usize + 1);
    let mut first_mismatch = None;
    for level in 0..=max_level {
        let s = symbolic.diagonal_on_number_state(level);
        let closed = BigRational::from_integer(commutator_closed_form(n as u64, level));
        let explicit = explicit_a_n(n, level);
        let matches = s == closed
            && explicit.as_ref().is_none_or(|e| BigRational::from_integer(e.clone()) == s);
        if !matches && first_mismatch.is_none() {
            first_mismatch = Some(level);
        }
        levels.push(LevelComparison {
            level,
            symbolic: s.to_string(),
            closed_form: closed.to_string(),
            explicit: explicit.map(|e| e.to_string()),
            matches,
        });
    }
    let vacuum_is_factorial = symbolic.vacuum_expectation() == BigRational::from_integer(factorial(n as u64));
    Ok(ClosedFormReport { order: n, levels, first_mismatch, vacuum_is_factorial, diagonal })
}

/// Nearest `f64` to an exact rational, including magnitudes whose numerator
/// or denominator alone would overflow.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * rational_ln_abs(x).exp()
}

/// `ln |x|` computed from the exact integers.
pub fn rational_ln_abs(x: &BigRational) -> f64 {
    bigint_ln(&x.numer().abs()) - bigint_ln(x.denom())
}

fn bigint_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 960 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 960;
    let head: BigInt = x >> shift;
    head.to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn poly(terms: &[((u32, u32), i64)]) -> NormalOrderedPoly {
        NormalOrderedPoly::from_terms(terms.iter().map(|&(k, c)| (k, int(c))))
    }

    #[test]
    fn basic_products() {
        let a = NormalOrderedPoly::annihilation_power(1);
        let ad = NormalOrderedPoly::creation_power(1);
        assert_eq!(a.multiply(&ad), poly(&[((1, 1), 1), ((0, 0), 1)]));
        let a2 = NormalOrderedPoly::annihilation_power(2);
        let ad2 = NormalOrderedPoly::creation_power(2);
        assert_eq!(a2.multiply(&ad2), poly(&[((2, 2), 1), ((1, 1), 4), ((0, 0), 2)]));
        let p = poly(&[((3, 1), 2), ((0, 2), -5)]);
        assert_eq!(NormalOrderedPoly::one().multiply(&p), p);
        assert_eq!(p.multiply(&NormalOrderedPoly::one()), p);
    }

    #[test]
    fn commutators() {
        let a = NormalOrderedPoly::annihilation_power(1);
        let ad = NormalOrderedPoly::creation_power(1);
        assert_eq!(a.commutator(&ad), NormalOrderedPoly::one());
        let c = NormalOrderedPoly::number().commutator(&NormalOrderedPoly::creation_power(3));
        assert_eq!(c, poly(&[((3, 0), 3)]));
        // A_3 = 9 a+^2 a^2 + 18 a+ a + 6 in normal order
        assert_eq!(a_n_commutator(3), poly(&[((2, 2), 9), ((1, 1), 18), ((0, 0), 6)]));
    }

    #[test]
    fn nested_low_orders() {
        assert_eq!(nested_commutator(3, 0).unwrap(), NormalOrderedPoly::number());
        assert_eq!(nested_commutator(3, 1).unwrap(), poly(&[((3, 0), -3), ((0, 3), -3)]));
        for n in 1..=4u32 {
            let second = nested_commutator(n, 2).unwrap();
            let target = a_n_commutator(n).scale(&int(2 * n as i64));
            for level in 0..12 {
                assert_eq!(
                    second.diagonal_on_number_state(level),
                    target.diagonal_on_number_state(level),
                    "n={n} level={level}"
                );
            }
        }
    }

    #[test]
    fn nested_respects_budget() {
        let tight = AlgebraBudget { max_degree: 10, max_terms: 1000 };
        assert!(nested_commutator_with(3, 8, &tight).is_ok());
        let err = nested_commutator_with(3, 9, &tight).unwrap_err();
        assert!(matches!(err, Error::Budget { parameter: "degree", .. }));
    }

    #[test]
    fn vacuum_expectations() {
        assert!(NormalOrderedPoly::number().vacuum_expectation().is_zero());
        assert_eq!(a_n_commutator(3).vacuum_expectation(), int(6));
        let a = NormalOrderedPoly::annihilation_power(1);
        let ad = NormalOrderedPoly::creation_power(1);
        assert_eq!(a.multiply(&ad).vacuum_expectation(), int(1));
    }

    #[test]
    fn low_order_coefficients() {
        let s1 = coefficients(1, 3).unwrap();
        assert_eq!(s1.get(2), Some(&int(1)));
        assert!(s1.get(4).unwrap().is_zero());
        assert!(s1.get(6).unwrap().is_zero());
        let s2 = coefficients(2, 2).unwrap();
        assert_eq!(s2.get(2), Some(&int(4)));
        assert_eq!(s2.get(4), Some(&BigRational::new(BigInt::from(16), BigInt::from(3))));
        assert_eq!(coefficients(3, 1).unwrap().get(2), Some(&int(18)));
        assert_eq!(coefficients(4, 1).unwrap().get(2), Some(&int(96)));
        assert!(coefficients(3, 0).is_err());
    }

    #[test]
    fn pruned_recursion_matches_full_nesting() {
        for n in 1..=4u32 {
            let series = coefficients(n, 4).unwrap();
            let mut fact = BigInt::one();
            for m in 1..=8u32 {
                fact *= m;
                let full = nested_commutator(n, m).unwrap().vacuum_expectation() / BigRational::from_integer(fact.clone());
                assert_eq!(series.get(m), Some(&full), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn coefficient_budget_names_m() {
        let tight = AlgebraBudget { max_degree: 20, max_terms: 1000 };
        let err = coefficients_with(3, 10, &tight).unwrap_err();
        assert!(matches!(err, Error::Budget { parameter: "M", .. }));
        assert!(coefficients_with(3, 9, &tight).is_ok());
    }

    #[test]
    fn closed_form_reports() {
        for n in 1..=4 {
            let report = verify_closed_form(n, 10).unwrap();
            assert!(report.passed(), "n={n}");
        }
        let r4 = verify_closed_form(4, 3).unwrap();
        assert_eq!(r4.levels[1].symbolic, "120");
        assert_eq!(r4.levels[1].explicit.as_deref(), Some("120"));
        let r2 = verify_closed_form(2, 5).unwrap();
        assert_eq!(r2.levels[5].closed_form, "22");
    }

    #[test]
    fn partial_sums() {
        let s2 = coefficients(2, 12).unwrap();
        assert_eq!(taylor_partial_sum(&s2, 0.0), 0.0);
        assert!((taylor_partial_sum(&s2, 0.1) - 0.2f64.sinh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn rational_conversion_handles_huge_values() {
        let huge = BigRational::from_integer(BigInt::from(10).pow(400));
        let tiny = BigRational::new(BigInt::one(), BigInt::from(10).pow(400));
        assert!((rational_ln_abs(&huge) - 400.0 * 10f64.ln()).abs() < 1e-10);
        assert!((rational_ln_abs(&tiny) + 400.0 * 10f64.ln()).abs() < 1e-10);
        assert_eq!(rational_to_f64(&int(-3)), -3.0);
        let mixed = BigRational::new(BigInt::from(10).pow(330), BigInt::from(10).pow(320));
        assert!((rational_to_f64(&mixed) / 1e10 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(a_n_commutator(2).to_string(), "4 a+ a + 2");
        let product = NormalOrderedPoly::annihilation_power(2).multiply(&NormalOrderedPoly::creation_power(2));
        assert_eq!(product.to_string(), "a+^2 a^2 + 4 a+ a + 2");
        assert_eq!(nested_commutator(3, 1).unwrap().to_string(), "-3 a+^3 - 3 a^3");
        assert_eq!(NormalOrderedPoly::zero().to_string(), "0");
    }
}
