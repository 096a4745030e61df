//! Finite Blaschke products and their Malmquist-Takenaka functions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::series::{self, poly_from_roots, Polynomial, PowerSeries, RootForm};

/// Distance to a pole below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-12;
/// Allowed deviation of `|tau|` from 1.
pub const TAU_TOL: f64 = 1e-12;

/// `B(z) = tau * prod (z + lambda_j) / (1 + conj(lambda_j) z)`.
///
/// Root order is preserved as given; it fixes the individual `E_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct {
    tau: C64,
    roots: Vec<C64>,
}

impl BlaschkeProduct {
    pub fn new(tau: C64, roots: Vec<C64>) -> Result<Self> {
        let modulus = tau.norm();
        let gap = (modulus - 1.0).abs();
        if gap.is_nan() || gap > TAU_TOL {
            return Err(Error::NonUnimodularTau { modulus });
        }
        for (index, l) in roots.iter().enumerate() {
            let modulus = l.norm();
            if modulus.is_nan() || modulus >= 1.0 {
                return Err(Error::RootOutsideDisc { index, modulus });
            }
        }
        Ok(Self { tau, roots })
    }

    pub fn from_roots(roots: Vec<C64>) -> Result<Self> {
        Self::new(ONE, roots)
    }

    /// `z^d`.
    pub fn monomial(d: usize) -> Self {
        Self {
            tau: ONE,
            roots: vec![ZERO; d],
        }
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn with_tau(&self, tau: C64) -> Result<Self> {
        Self::new(tau, self.roots.clone())
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().fold(0.0, |acc: f64, l| acc.max(l.norm()))
    }

    pub fn has_nonzero_root(&self) -> bool {
        self.roots.iter().any(|&l| l != ZERO)
    }

    /// Poles `-1 / conj(lambda_j)` of the nonzero roots.
    pub fn poles(&self) -> Vec<C64> {
        self.roots
            .iter()
            .filter(|&&l| l != ZERO)
            .map(|l| -ONE / l.conj())
            .collect()
    }

    fn check_pole(&self, z: C64) -> Result<()> {
        for pole in self.poles() {
            let distance = (z - pole).norm();
            if distance < POLE_TOL {
                return Err(Error::PoleProximity { z, pole, distance });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, z: C64) -> Result<C64> {
        self.check_pole(z)?;
        Ok(self
            .roots
            .iter()
            .fold(self.tau, |acc, &l| acc * (z + l) / (ONE + l.conj() * z)))
    }

    /// `tau * p` with `p(z) = prod (z + lambda_j)`.
    pub fn numerator(&self) -> Polynomial {
        poly_from_roots(&self.roots, RootForm::ZPower)
            .expect("roots validated")
            .scale(self.tau)
    }

    /// `qbar(z) = prod (1 + conj(lambda_j) z)`.
    pub fn denominator(&self) -> Polynomial {
        poly_from_roots(&self.roots, RootForm::ConstantTerm).expect("roots validated")
    }

    /// Default series order from the largest root modulus.
    pub fn default_order(&self) -> Result<usize> {
        series::default_series_order(self.max_modulus(), false)
    }

    /// Taylor coefficients `beta_0..beta_order` of `B` at 0.
    pub fn taylor(&self, order: usize) -> PowerSeries {
        let mut s = PowerSeries::one(order).scale(self.tau);
        for &l in &self.roots {
            s = s.mul_linear(l, ONE).div_unit_linear(l.conj());
        }
        s.with_decay(self.max_modulus())
    }

    /// Index of the last Taylor coefficient with modulus above `eps`.
    ///
    /// The order is doubled until the trailing eighth of the computed
    /// coefficients lies below `eps`. Returns 0 for a constant product.
    pub fn effective_depth(&self, eps: f64) -> usize {
        let mut order = self
            .default_order()
            .unwrap_or(series::MAX_SERIES_ORDER)
            .max(series::MIN_SERIES_ORDER);
        loop {
            let t = self.taylor(order);
            let tail_start = order - order / 8;
            let tail_small = t.coeffs()[tail_start..].iter().all(|c| c.norm() <= eps);
            if tail_small || order >= 4 * series::MAX_SERIES_ORDER {
                return t.coeffs().iter().rposition(|c| c.norm() > eps).unwrap_or(0);
            }
            order *= 2;
        }
    }
}

/// `numerator / denominator`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
}

impl RationalFunction {
    pub fn eval(&self, z: C64) -> C64 {
        self.numerator.eval(z) / self.denominator.eval(z)
    }
}

/// Malmquist-Takenaka functions `E_1..E_d` of a Blaschke product, as exact
/// rational functions and as Taylor rows at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct MtBasis {
    pub functions: Vec<RationalFunction>,
    pub taylor: Vec<PowerSeries>,
    order: usize,
}

impl MtBasis {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `E_j(z)` for 1-based `j`, exact rational evaluation.
    pub fn eval(&self, j: usize, z: C64) -> C64 {
        self.functions[j - 1].eval(z)
    }

    /// Row `k` of the Taylor table: `(taylor[0][k], .., taylor[d-1][k])`.
    pub fn coefficient_column(&self, k: usize) -> Vec<C64> {
        self.taylor.iter().map(|row| row.coeff(k)).collect()
    }

    /// H2 Gram matrix of the truncated Taylor rows, row-major `d x d`.
    pub fn gram(&self) -> Vec<Vec<C64>> {
        let d = self.len();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        self.taylor[i]
                            .coeffs()
                            .iter()
                            .zip(self.taylor[j].coeffs())
                            .map(|(a, b)| a * b.conj())
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Largest entry of `|G - I|`.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.gram();
        let mut worst = 0.0_f64;
        for (i, row) in g.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

/// Builds `E_j(z) = sqrt(1 - |l_j|^2) / (1 + conj(l_j) z) * prod_{k<j} (z + l_k)/(1 + conj(l_k) z)`.
///
/// `tau` plays no part.
pub fn mt_basis(b: &BlaschkeProduct, order: usize) -> Result<MtBasis> {
    if order < series::MIN_SERIES_ORDER {
        return Err(Error::OrderTooSmall {
            order,
            minimum: series::MIN_SERIES_ORDER,
        });
    }
    let d = b.degree();
    let mut functions = Vec::with_capacity(d);
    let mut taylor = Vec::with_capacity(d);
    let mut prefix_num = Polynomial::constant(ONE);
    let mut prefix_den = Polynomial::constant(ONE);
    let mut prefix_series = PowerSeries::one(order);
    for &l in b.roots() {
        let norm = C64::new(libm::sqrt(1.0 - l.norm_sqr()), 0.0);
        let own_den = Polynomial::new(vec![ONE, l.conj()]);
        let den = &prefix_den * &own_den;
        functions.push(RationalFunction {
            numerator: prefix_num.scale(norm),
            denominator: den.clone(),
        });
        let row = prefix_series.div_unit_linear(l.conj());
        taylor.push(row.scale(norm).with_decay(b.max_modulus()));

        prefix_num = &prefix_num * &Polynomial::new(vec![l, ONE]);
        prefix_den = den;
        prefix_series = row.mul_linear(l, ONE);
    }
    Ok(MtBasis {
        functions,
        taylor,
        order,
    })
}

/// `|1 - conj(B(w)) B(z) - sum_j conj(E_j(w)) (1 - conj(w) z) E_j(z)|`
/// with exact rational evaluation.
pub fn model_identity_residual(
    b: &BlaschkeProduct,
    basis: &MtBasis,
    z: C64,
    w: C64,
) -> Result<f64> {
    let bz = b.evaluate(z)?;
    let bw = b.evaluate(w)?;
    let lhs = ONE - bw.conj() * bz;
    let kernel = ONE - w.conj() * z;
    let rhs: C64 = basis
        .functions
        .iter()
        .map(|e| e.eval(w).conj() * kernel * e.eval(z))
        .sum();
    Ok((lhs - rhs).norm())
}

/// `d^{s-1} E_j(0) / dz^{s-1}`, with the raw Taylor coefficient alongside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivative {
    /// `taylor[j][s-1]`, i.e. the derivative divided by `(s-1)!`.
    pub coefficient: C64,
    /// `(s-1)! * coefficient`; `None` once the factorial overflows.
    pub value: Option<C64>,
}

pub fn mt_derivative_at_zero(basis: &MtBasis, j: usize, s: usize) -> Result<Derivative> {
    if j == 0 || j > basis.len() || s == 0 {
        return Err(Error::InvalidInput(alloc::format!(
            "need 1 <= j <= {} and s >= 1, got j = {j}, s = {s}",
            basis.len()
        )));
    }
    let k = s - 1;
    if k > basis.order() {
        return Err(Error::OrderExceeded {
            requested: k,
            available: basis.order(),
        });
    }
    let coefficient = basis.taylor[j - 1].coeff(k);
    let fact = (1..=k).fold(1.0_f64, |acc, i| acc * i as f64);
    let value = fact.is_finite().then(|| coefficient * fact);
    Ok(Derivative { coefficient, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            BlaschkeProduct::monomial(1).evaluate(c(0.5, 0.0)).unwrap(),
            c(0.5, 0.0)
        );
        let b = BlaschkeProduct::from_roots(vec![c(0.5, 0.0)]).unwrap();
        assert!((b.evaluate(ZERO).unwrap() - c(0.5, 0.0)).norm() < 1e-16);
        let b = BlaschkeProduct::from_roots(vec![c(0.5, 0.0), c(0.0, 0.3)]).unwrap();
        let z = C64::from_polar(1.0, core::f64::consts::PI / 7.0);
        assert!((b.evaluate(z).unwrap().norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn evaluate_near_pole_fails() {
        let b = BlaschkeProduct::from_roots(vec![c(0.5, 0.0)]).unwrap();
        assert!(matches!(
            b.evaluate(c(-2.0, 0.0)),
            Err(Error::PoleProximity { .. })
        ));
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(
            BlaschkeProduct::new(c(0.5, 0.0), vec![]),
            Err(Error::NonUnimodularTau { .. })
        ));
        assert!(matches!(
            BlaschkeProduct::from_roots(vec![c(0.1, 0.0), c(0.0, 1.0)]),
            Err(Error::RootOutsideDisc { index: 1, .. })
        ));
    }

    #[test]
    fn mt_basis_of_monomial_is_unit_vectors() {
        let basis = mt_basis(&BlaschkeProduct::monomial(4), 32).unwrap();
        for j in 0..4 {
            for k in 0..=32 {
                let want = if k == j { ONE } else { ZERO };
                assert_eq!(basis.taylor[j].coeff(k), want);
            }
        }
    }

    #[test]
    fn mt_single_root_is_geometric() {
        let basis = mt_basis(&BlaschkeProduct::from_roots(vec![c(0.5, 0.0)]).unwrap(), 40).unwrap();
        for k in 0..=40 {
            let want = 0.75f64.sqrt() * (-0.5f64).powi(k as i32);
            assert!((basis.taylor[0].coeff(k) - c(want, 0.0)).norm() < 1e-16);
        }
    }

    #[test]
    fn mt_zero_then_nonzero_root() {
        let lam = c(0.4, -0.2);
        let basis = mt_basis(&BlaschkeProduct::from_roots(vec![ZERO, lam]).unwrap(), 32).unwrap();
        let z = c(0.3, 0.1);
        let want = z * (1.0 - lam.norm_sqr()).sqrt() / (ONE + lam.conj() * z);
        assert!((basis.eval(2, z) - want).norm() < 1e-15);
        assert!((basis.eval(1, z) - ONE).norm() < 1e-15);
    }

    #[test]
    fn model_identity_examples() {
        let b = BlaschkeProduct::from_roots(vec![c(0.3, 0.4), c(-0.5, 0.1)]).unwrap();
        let basis = mt_basis(&b, 32).unwrap();
        let r = model_identity_residual(&b, &basis, ZERO, ZERO).unwrap();
        assert!(r < 1e-13);
        let z1 = BlaschkeProduct::monomial(1);
        let basis1 = mt_basis(&z1, 32).unwrap();
        let r = model_identity_residual(&z1, &basis1, c(0.2, 0.7), c(-0.9, 0.1)).unwrap();
        assert!(r < 1e-13);
    }

    #[test]
    fn derivative_examples() {
        let basis = mt_basis(&BlaschkeProduct::monomial(5), 32).unwrap();
        for j in 1..=5 {
            let d = mt_derivative_at_zero(&basis, j, j).unwrap();
            let fact: f64 = (1..j).map(|i| i as f64).product();
            assert_eq!(d.value, Some(c(fact, 0.0)));
            for s in 6..10 {
                assert_eq!(
                    mt_derivative_at_zero(&basis, j, s).unwrap().coefficient,
                    ZERO
                );
            }
        }
        let basis = mt_basis(&BlaschkeProduct::from_roots(vec![c(0.5, 0.0)]).unwrap(), 32).unwrap();
        let d = mt_derivative_at_zero(&basis, 1, 2).unwrap();
        assert!((d.value.unwrap() - c(-0.4330127018922193, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_order_exceeded() {
        let basis = mt_basis(&BlaschkeProduct::monomial(2), 32).unwrap();
        assert_eq!(
            mt_derivative_at_zero(&basis, 1, 40),
            Err(Error::OrderExceeded {
                requested: 39,
                available: 32
            })
        );
        let big = mt_basis(
            &BlaschkeProduct::from_roots(vec![c(0.5, 0.0)]).unwrap(),
            400,
        )
        .unwrap();
        let d = mt_derivative_at_zero(&big, 1, 300).unwrap();
        assert!(d.value.is_none());
        assert!(d.coefficient.norm() > 0.0);
    }

    #[test]
    fn effective_depth() {
        assert_eq!(BlaschkeProduct::monomial(3).effective_depth(1e-15), 3);
        assert_eq!(BlaschkeProduct::monomial(0).effective_depth(1e-15), 0);
        let b = BlaschkeProduct::from_roots(vec![c(0.5, 0.0)]).unwrap();
        // |beta_k| = 0.75 * 0.5^(k-1)
        let want = (1..200)
            .rposition(|k| 0.75 * 0.5f64.powi(k - 1) > 1e-15)
            .unwrap()
            + 1;
        assert_eq!(b.effective_depth(1e-15), want);
    }

    #[test]
    fn rejects_small_order() {
        assert!(matches!(
            mt_basis(&BlaschkeProduct::monomial(1), 8),
            Err(Error::OrderTooSmall { .. })
        ));
    }
}
