mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use squeezelab::fock::{
    a_n_commutator_closed_form, annihilation_matrix, creation_matrix, generator, ladder_power, number_operator, power,
};
use squeezelab::{commutator_closed_form, FockDim, SparseOperator, SqueezeParams};

fn dim(n: usize) -> FockDim {
    FockDim::new(n).unwrap()
}

fn dense_of(op: &SparseOperator) -> common::Dense {
    let n = op.dim().size();
    let flat = op.to_dense();
    (0..n).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect()
}

#[test]
fn ladder_matrices_match_oracle() {
    let n = 12;
    let a = dense_of(&annihilation_matrix(dim(n)));
    let oracle = common::annihilation(n);
    for i in 0..n {
        for j in 0..n {
            assert!((a[i][j] - oracle[i][j]).norm() < 1e-15);
        }
    }
    let ad = dense_of(&creation_matrix(dim(n)));
    assert_eq!(ad[1][0], Complex64::new(1.0, 0.0));
    assert!((ad[3][2].re - 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn ladder_power_is_exact_for_large_levels() {
    // sqrt(1000 * 999 * 998)
    let a3 = ladder_power(dim(1001), 3);
    let expected = (1000.0f64 * 999.0 * 998.0).sqrt();
    assert_eq!(a3.get(997, 1000).re, expected);
    let repeated = power(&annihilation_matrix(dim(1001)), 3);
    assert!((repeated.get(997, 1000).re - expected).abs() / expected < 1e-14);
}

#[test]
fn number_operator_diagonal() {
    let n_op = number_operator(dim(5));
    assert!(n_op.is_diagonal());
    assert_eq!(n_op.real_diagonal().unwrap(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    let ada = creation_matrix(dim(5)).matmul(&annihilation_matrix(dim(5))).unwrap();
    for (m, v) in ada.real_diagonal().unwrap().into_iter().enumerate() {
        assert!((v - m as f64).abs() < 1e-14);
    }
}

#[test]
fn generator_entries_and_order_guard() {
    let k = generator(&SqueezeParams::real(3, 0.5).unwrap(), dim(10)).unwrap();
    // <3| K |0> = r sqrt(3!)
    assert!((k.get(3, 0).re - 0.5 * 6f64.sqrt()).abs() < 1e-15);
    assert!((k.get(0, 3).re + 0.5 * 6f64.sqrt()).abs() < 1e-15);
    assert_eq!(k.get(1, 0), Complex64::new(0.0, 0.0));
    assert!(generator(&SqueezeParams::real(3, 0.5).unwrap(), dim(3)).is_err());
    assert!(generator(&SqueezeParams::real(3, 0.0).unwrap(), dim(10)).unwrap().is_zero());
    assert!(SqueezeParams::real(0, 0.1).is_err());
}

#[test]
fn commutator_closed_form_examples() {
    // 4m + 2
    let a2 = a_n_commutator_closed_form(2, dim(6)).unwrap().real_diagonal().unwrap();
    assert_eq!(a2, vec![2.0, 6.0, 10.0, 14.0, 18.0, 22.0]);
    let a3 = a_n_commutator_closed_form(3, dim(4)).unwrap().real_diagonal().unwrap();
    assert_eq!(&a3[..2], &[6.0, 24.0]);
    let a4 = a_n_commutator_closed_form(4, dim(4)).unwrap().real_diagonal().unwrap();
    assert_eq!(a4[0], 24.0);
    for n in 1..=6u64 {
        for m in 0..40u64 {
            assert_eq!(
                commutator_closed_form(n, m).to_string(),
                common::commutator_diagonal(n, m).to_string(),
                "n={n} m={m}"
            );
        }
    }
}

#[test]
fn closed_form_diagonal_bounded_below_by_factorial() {
    for n in 1..=4u32 {
        let fact: f64 = (1..=n).map(f64::from).product();
        let diag = a_n_commutator_closed_form(n, dim(200)).unwrap().real_diagonal().unwrap();
        assert_eq!(diag[0], fact);
        assert!(diag.iter().all(|&d| d >= fact));
        assert!(diag.windows(2).all(|w| if n == 1 { w[1] == w[0] } else { w[1] > w[0] }));
    }
}

proptest! {
    #[test]
    fn generator_is_anti_hermitian(n in 1u32..=5, re in -2.0f64..2.0, im in -2.0f64..2.0, levels in 8usize..80) {
        let params = SqueezeParams::new(n, Complex64::new(re, im)).unwrap();
        let k = generator(&params, dim(levels)).unwrap();
        prop_assert_eq!(k.anti_hermitian_deviation(), 0.0);
        let sum = k.add(&k.adjoint()).unwrap();
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn truncated_commutator_matches_closed_form(n in 1u32..=4, extra in 2usize..30) {
        let levels = 2 * n as usize + extra;
        let d = dim(levels);
        let a_n = power(&annihilation_matrix(d), n);
        let ad_n = power(&creation_matrix(d), n);
        let comm = a_n.matmul(&ad_n).unwrap().sub(&ad_n.matmul(&a_n).unwrap()).unwrap();
        let closed = a_n_commutator_closed_form(n, d).unwrap();
        let safe = levels - n as usize;
        for i in 0..safe {
            for j in 0..safe {
                let (x, y) = (comm.get(i, j), closed.get(i, j));
                prop_assert!((x - y).norm() <= 1e-9 * y.norm().max(1.0), "n={} ({},{}) {} vs {}", n, i, j, x, y);
            }
        }
    }
}
