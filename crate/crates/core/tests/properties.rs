use blaschke_core::blaschke::{model_identity_residual, mt_basis, BlaschkeProduct};
use blaschke_core::frames::{build_frame, classify_redundancy, norm_formula, Tolerances};
use blaschke_core::linalg::{max_abs_entry, CMatrix};
use blaschke_core::operators::{
    apply_blaschke_adjoint, blaschke_factor, build_isometry, coisometry_defect_extended,
    IsometrySpec, ShiftKind,
};
use blaschke_core::series::{
    elementary_symmetric, exchange_map, in_symmetrized_polydisc, Polynomial, PowerSeries,
};
use blaschke_core::wold::{verify_wandering, wold_decompose};
use blaschke_core::C64;
use proptest::prelude::*;

fn complex(max: f64) -> impl Strategy<Value = C64> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn roots(max_deg: usize, max_mod: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(max_mod), 1..=max_deg)
}

fn poly(max_deg: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..=max_deg + 1)
        .prop_map(|v| Polynomial::new(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()))
}

fn spec() -> impl Strategy<Value = IsometrySpec> {
    prop_oneof![
        (8usize..40).prop_map(|n| IsometrySpec::right_shift(n).unwrap()),
        (prop_oneof![Just(2usize), Just(3)], 9usize..40)
            .prop_map(|(p, n)| IsometrySpec::mult_shift(p, n.max(p * p)).unwrap()),
        prop::collection::vec(0.0..6.3f64, 8..30)
            .prop_map(|ph| IsometrySpec::diagonal_unitary(ph).unwrap()),
        (prop::collection::vec(0.0..6.3f64, 1..6), 9usize..30)
            .prop_map(|(ph, n)| IsometrySpec::wold_sum(ph, ShiftKind::Right, n + 6).unwrap()),
        (prop::collection::vec(0.0..6.3f64, 1..6), 9usize..30)
            .prop_map(|(ph, n)| IsometrySpec::wold_sum(ph, ShiftKind::Mult(2), n + 6).unwrap()),
    ]
}

fn boundary_sup(p: &Polynomial) -> f64 {
    (0..720)
        .map(|k| {
            p.eval(C64::from_polar(
                1.0,
                k as f64 * std::f64::consts::TAU / 720.0,
            ))
            .norm()
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exchange_is_an_involution(p in poly(6)) {
        let d = p.degree();
        let jj = exchange_map(&exchange_map(&p));
        let padded: Vec<C64> = (0..=d).map(|k| jj.coeffs().get(k).copied().unwrap_or_default()).collect();
        for (a, b) in padded.iter().zip(p.coeffs()) {
            prop_assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn exchange_preserves_boundary_sup(p in poly(6)) {
        let a = boundary_sup(&p);
        let b = boundary_sup(&exchange_map(&p));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn symmetrized_round_trip(lam in roots(5, 0.95)) {
        let c = elementary_symmetric(&lam);
        let m = in_symmetrized_polydisc(&c).unwrap();
        prop_assert!(m.inside);
        let witness = m.point.witness.expect("witness for an inside point");
        let back = elementary_symmetric(&witness);
        for (a, b) in back.iter().zip(&c) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn series_product_is_associative(
        a in prop::collection::vec(complex(1.0), 1..20),
        b in prop::collection::vec(complex(1.0), 1..20),
        c in prop::collection::vec(complex(1.0), 1..20),
    ) {
        let k = 24;
        let f = |v: Vec<C64>| PowerSeries::from_polynomial(&Polynomial::new(v), k);
        let (a, b, c) = (f(a), f(b), f(c));
        let left = &(&a * &b) * &c;
        let right = &a * &(&b * &c);
        for i in 0..=k {
            prop_assert!((left.coeff(i) - right.coeff(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn model_identity_holds(lam in roots(6, 0.9), z in complex(1.0), w in complex(1.0)) {
        let b = BlaschkeProduct::from_roots(lam).unwrap();
        let basis = mt_basis(&b, 32).unwrap();
        prop_assert!(model_identity_residual(&b, &basis, z, w).unwrap() < 1e-12);
    }

    #[test]
    fn mt_rows_are_orthonormal(lam in roots(6, 0.9)) {
        let b = BlaschkeProduct::from_roots(lam).unwrap();
        let basis = mt_basis(&b, b.default_order().unwrap()).unwrap();
        prop_assert!(basis.gram_deviation() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn factors_commute(spec in spec(), a in complex(0.9), b in complex(0.9)) {
        let v = build_isometry(&spec);
        let fa = blaschke_factor(&v, a).unwrap();
        let fb = blaschke_factor(&v, b).unwrap();
        prop_assert!(max_abs_entry(&(&fa * &fb - &fb * &fa)) < 1e-12);
    }

    #[test]
    fn pure_shift_adjoint_is_nilpotent(spec in spec()) {
        prop_assume!(spec.is_pure_shift());
        let n = spec.dim();
        let vstar = build_isometry(&spec).adjoint();
        let mut pow = CMatrix::identity(n, n);
        for _ in 0..n {
            pow = &pow * &vstar;
        }
        prop_assert!(max_abs_entry(&pow) == 0.0);
    }

    #[test]
    fn extended_coisometry(spec in spec(), lam in roots(4, 0.7)) {
        let b = BlaschkeProduct::from_roots(lam).unwrap();
        let bv = apply_blaschke_adjoint(&b, &build_isometry(&spec)).unwrap();
        prop_assert!(coisometry_defect_extended(&b, &bv) < 1e-10);
    }

    #[test]
    fn columns_are_contractions(spec in spec(), lam in roots(4, 0.9)) {
        let b = BlaschkeProduct::from_roots(lam).unwrap();
        let sys = build_frame(&b, &spec).unwrap();
        for m in 1..=spec.dim() {
            prop_assert!(sys.vector(m).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn norm_formula_matches_columns(spec in spec(), lam in roots(4, 0.9)) {
        let b = BlaschkeProduct::from_roots(lam).unwrap();
        let sys = build_frame(&b, &spec).unwrap();
        for m in 1..=spec.dim() {
            let direct = sys.vector(m).norm_squared();
            prop_assert!((norm_formula(&sys, m).unwrap() - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn norms_ignore_root_order(spec in spec(), lam in roots(4, 0.9), shift in 0usize..4) {
        let b = BlaschkeProduct::from_roots(lam.clone()).unwrap();
        let mut rotated = lam.clone();
        rotated.rotate_left(shift % lam.len());
        rotated.reverse();
        let r = BlaschkeProduct::from_roots(rotated).unwrap();
        let (s1, s2) = (build_frame(&b, &spec).unwrap(), build_frame(&r, &spec).unwrap());
        for m in 1..=spec.dim() {
            prop_assert!((norm_formula(&s1, m).unwrap() - norm_formula(&s2, m).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_changes_no_norm_or_verdict(spec in spec(), lam in roots(4, 0.9), t in 0.0..6.3f64) {
        let b = BlaschkeProduct::from_roots(lam).unwrap();
        let rotated = b.with_tau(C64::from_polar(1.0, t)).unwrap();
        let tol = Tolerances::default();
        let r1 = classify_redundancy(&build_frame(&b, &spec).unwrap(), &tol).unwrap();
        let r2 = classify_redundancy(&build_frame(&rotated, &spec).unwrap(), &tol).unwrap();
        for (x, y) in r1.per_index.iter().zip(&r2.per_index) {
            prop_assert!((x.norm_direct - y.norm_direct).abs() < 1e-12);
            prop_assert!((x.norm_formula - y.norm_formula).abs() < 1e-12);
            prop_assert_eq!(x.redundant, y.redundant);
        }
    }

    #[test]
    fn wold_data_is_consistent(spec in spec()) {
        let w = wold_decompose(&spec);
        prop_assert_eq!(verify_wandering(&spec, &w), Ok(()));
    }
}
