use blaschke_core::{CMatrix, C64};
use blaschke_frames::formats::{
    coefficients_from_json, coefficients_to_json, read_matrix_binary, write_matrix_binary,
};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn complex() -> impl Strategy<Value = C64> {
    (finite(), finite()).prop_map(|(re, im)| C64::new(re, im))
}

proptest! {
    #[test]
    fn coefficients_round_trip_bit_exact(c in prop::collection::vec(complex(), 0..40)) {
        let back = coefficients_from_json(&coefficients_to_json(&c)).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn binary_matrix_round_trip(n in 0usize..12, seed in prop::collection::vec(complex(), 144)) {
        let m = CMatrix::from_fn(n, n, |i, j| seed[i * 12 + j]);
        let mut bytes = Vec::new();
        write_matrix_binary(&m, &mut bytes).unwrap();
        prop_assert_eq!(bytes.len(), 16 + 16 * n * n);
        prop_assert_eq!(read_matrix_binary(bytes.as_slice()).unwrap(), m);
    }

    #[test]
    fn truncated_binary_is_rejected(n in 1usize..6, cut in 1usize..16) {
        let m = CMatrix::from_element(n, n, C64::new(1.0, -2.0));
        let mut bytes = Vec::new();
        write_matrix_binary(&m, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - cut);
        prop_assert!(read_matrix_binary(bytes.as_slice()).is_err());
    }
}
