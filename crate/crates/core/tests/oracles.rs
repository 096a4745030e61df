//! Cross-checks against constructions that share no code with the library
//! paths they test.

use std::f64::consts::PI;

use blaschke_core::blaschke::{mt_basis, mt_derivative_at_zero, BlaschkeProduct};
use blaschke_core::frames::{build_frame, norm_formula};
use blaschke_core::operators::{apply_blaschke_adjoint, build_isometry, IsometrySpec, ShiftKind};
use blaschke_core::series::{poly_from_roots, RootForm};
use blaschke_core::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Taylor coefficients of `tau p / qbar` by long division.
fn long_division(b: &BlaschkeProduct, order: usize) -> Vec<C64> {
    let p = poly_from_roots(b.roots(), RootForm::ZPower).unwrap();
    let q = poly_from_roots(b.roots(), RootForm::ConstantTerm).unwrap();
    let mut beta = vec![C64::new(0.0, 0.0); order + 1];
    for k in 0..=order {
        let mut acc = b.tau() * p.coeffs().get(k).copied().unwrap_or_default();
        for i in 1..=k.min(q.degree()) {
            acc -= q.coeffs()[i] * beta[k - i];
        }
        beta[k] = acc;
    }
    beta
}

/// Coefficients `a_0..a_{K}` of an analytic function from `n` samples on
/// `|z| = rho`, by the discrete Cauchy formula.
fn cauchy_coefficients(f: impl Fn(C64) -> C64, rho: f64, n: usize, order: usize) -> Vec<C64> {
    let samples: Vec<C64> = (0..n)
        .map(|l| f(C64::from_polar(rho, 2.0 * PI * l as f64 / n as f64)))
        .collect();
    (0..=order)
        .map(|k| {
            let s: C64 = samples
                .iter()
                .enumerate()
                .map(|(l, &v)| v * C64::from_polar(1.0, -2.0 * PI * (l * k) as f64 / n as f64))
                .sum();
            s / (n as f64 * rho.powi(k as i32))
        })
        .collect()
}

fn sample_products() -> Vec<BlaschkeProduct> {
    vec![
        BlaschkeProduct::from_roots(vec![c(0.5, 0.0)]).unwrap(),
        BlaschkeProduct::from_roots(vec![c(0.5, 0.0), c(0.0, 0.3)]).unwrap(),
        BlaschkeProduct::new(
            C64::from_polar(1.0, 0.7),
            vec![c(0.0, 0.0), c(-0.4, 0.4), c(0.6, -0.1)],
        )
        .unwrap(),
        BlaschkeProduct::from_roots(vec![c(0.3, 0.3); 3]).unwrap(),
    ]
}

#[test]
fn taylor_matches_long_division() {
    for b in sample_products() {
        let t = b.taylor(80);
        let want = long_division(&b, 80);
        for (k, w) in want.iter().enumerate() {
            assert!((t.coeff(k) - w).norm() < 1e-14, "k = {k}");
        }
    }
}

#[test]
fn mt_rows_match_cauchy_coefficients() {
    for b in sample_products() {
        let basis = mt_basis(&b, 64).unwrap();
        for j in 1..=basis.len() {
            let coeffs = cauchy_coefficients(|z| basis.eval(j, z), 0.8, 256, 12);
            for (k, want) in coeffs.iter().enumerate() {
                let got = mt_derivative_at_zero(&basis, j, k + 1).unwrap().coefficient;
                assert!((got - want).norm() < 1e-12, "j = {j}, k = {k}");
            }
        }
    }
}

#[test]
fn right_shift_matrix_is_taylor_toeplitz() {
    let n = 48;
    let v = build_isometry(&IsometrySpec::right_shift(n).unwrap());
    for b in sample_products() {
        let bv = apply_blaschke_adjoint(&b, &v).unwrap();
        let beta = long_division(&b, n);
        for i in 1..=n {
            for m in 1..=n {
                let want = if m >= i { beta[m - i] } else { C64::default() };
                assert!((bv.matrix[(i - 1, m - 1)] - want).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn mult_shift_matrix_follows_orbits() {
    let n = 81;
    let p = 3;
    let v = build_isometry(&IsometrySpec::mult_shift(p, n).unwrap());
    for b in sample_products() {
        let bv = apply_blaschke_adjoint(&b, &v).unwrap();
        let beta = long_division(&b, 8);
        for i in 1..=n {
            for m in 1..=n {
                let mut want = C64::default();
                let mut x = i;
                let mut k = 0;
                while x <= m {
                    if x == m {
                        want = beta[k];
                    }
                    x *= p;
                    k += 1;
                }
                assert!(
                    (bv.matrix[(i - 1, m - 1)] - want).norm() < 1e-13,
                    "({i}, {m})"
                );
            }
        }
    }
}

#[test]
fn unitary_block_is_scalar_calculus() {
    let phases = vec![0.0, 1.3, 2.9];
    let spec = IsometrySpec::wold_sum(phases.clone(), ShiftKind::Right, 12).unwrap();
    let v = build_isometry(&spec);
    for b in sample_products() {
        let bv = apply_blaschke_adjoint(&b, &v).unwrap();
        for (k, &t) in phases.iter().enumerate() {
            let want = b.evaluate(C64::from_polar(1.0, -t)).unwrap();
            assert!((bv.matrix[(k, k)] - want).norm() < 1e-13);
        }
    }
}

#[test]
fn derivative_value_for_two_roots() {
    // E_2 for roots (0.5, 0.3i): third Taylor coefficient times 2!
    let b = BlaschkeProduct::from_roots(vec![c(0.5, 0.0), c(0.0, 0.3)]).unwrap();
    let basis = mt_basis(&b, 64).unwrap();
    let coeffs = cauchy_coefficients(|z| basis.eval(2, z), 0.5, 128, 3);
    let d = mt_derivative_at_zero(&basis, 2, 3).unwrap();
    assert!((d.value.unwrap() - coeffs[2] * 2.0).norm() < 1e-12);
}

#[test]
fn norm_formula_matches_brute_force_on_mult_shift() {
    let b = BlaschkeProduct::from_roots(vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
    let sys = build_frame(&b, &IsometrySpec::mult_shift(2, 64).unwrap()).unwrap();
    let beta = long_division(&b, 8);
    for m in 1..=64 {
        // |b_m|^2 = sum over the orbit below m of |beta_k|^2
        let mut x = m;
        let mut direct = beta[0].norm_sqr();
        let mut k = 1;
        while x % 2 == 0 {
            x /= 2;
            direct += beta[k].norm_sqr();
            k += 1;
        }
        assert!(
            (norm_formula(&sys, m).unwrap() - direct).abs() < 1e-14,
            "m = {m}"
        );
    }
}
