//! Complex polynomials, truncated power series, the exchange map and the
//! symmetrized-polydisc membership test.
//!
//! Root lists follow the factor convention `(z + lambda_j)`: the stored
//! `lambda_j` are the *negatives* of the polynomial zeros.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

use nalgebra::linalg::Schur;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};

/// Tail target for the default series order.
pub const SERIES_EPS: f64 = 1e-15;
pub const MIN_SERIES_ORDER: usize = 32;
pub const MAX_SERIES_ORDER: usize = 4096;
/// Root moduli above this need an explicit override.
pub const MAX_DEFAULT_RATIO: f64 = 0.99;
/// `|root| >= 1 - BOUNDARY_TOL` counts as outside the open disc.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Polynomial with complex coefficients, lowest order first.
///
/// The nominal degree is `coeffs.len() - 1` even when the leading
/// coefficient vanishes; the exchange map depends on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = ONE;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[self.degree()]
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == ONE
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Power-sum evaluation, kept as a cross-check for `eval`.
    pub fn eval_naive(&self, z: C64) -> C64 {
        let mut zk = ONE;
        let mut acc = ZERO;
        for &c in &self.coeffs {
            acc += c * zk;
            zk *= z;
        }
        acc
    }

    /// Coefficientwise conjugate, `z -> conj(p(conj z))`.
    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Maximum of `|p|` over `samples` equispaced points of the unit circle.
    pub fn boundary_max(&self, samples: usize) -> f64 {
        boundary_moduli(self, samples).fold(0.0, f64::max)
    }

    pub fn boundary_min(&self, samples: usize) -> f64 {
        boundary_moduli(self, samples).fold(f64::INFINITY, f64::min)
    }
}

fn boundary_moduli(p: &Polynomial, samples: usize) -> impl Iterator<Item = f64> + '_ {
    (0..samples).map(move |k| {
        let theta = 2.0 * core::f64::consts::PI * k as f64 / samples as f64;
        p.eval(C64::from_polar(1.0, theta)).norm()
    })
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[C64], k: usize| v.get(k).copied().unwrap_or(ZERO);
        Polynomial::new(
            (0..n)
                .map(|k| get(&self.coeffs, k) + get(&rhs.coeffs, k))
                .collect(),
        )
    }
}

/// Which factor shape `poly_from_roots` expands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootForm {
    /// `p(z) = prod (z + lambda_j)`, monic.
    ZPower,
    /// `qbar(z) = prod (1 + conj(lambda_j) z)`, constant term 1.
    ConstantTerm,
}

pub fn poly_from_roots(roots: &[C64], form: RootForm) -> Result<Polynomial> {
    let mut p = Polynomial::constant(ONE);
    for (index, &lam) in roots.iter().enumerate() {
        if !(lam.re.is_finite() && lam.im.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "root {index} is not finite"
            )));
        }
        let factor = match form {
            RootForm::ZPower => Polynomial::new(vec![lam, ONE]),
            RootForm::ConstantTerm => {
                let modulus = lam.norm();
                if modulus >= 1.0 {
                    return Err(Error::RootOutsideDisc { index, modulus });
                }
                Polynomial::new(vec![ONE, lam.conj()])
            }
        };
        p = &p * &factor;
    }
    Ok(p)
}

/// `Jp(z) = z^d conj(p(1/conj z))`: conjugated coefficient reversal.
pub fn exchange_map(p: &Polynomial) -> Polynomial {
    Polynomial::new(p.coeffs.iter().rev().map(|c| c.conj()).collect())
}

/// Elementary symmetric functions `(pi_{d,1}, ..., pi_{d,d})` of `lambda`.
pub fn elementary_symmetric(lambda: &[C64]) -> Vec<C64> {
    // e[k] accumulates pi_{., k}
    let mut e = vec![ZERO; lambda.len() + 1];
    e[0] = ONE;
    for (i, &l) in lambda.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * l;
        }
    }
    e.remove(0);
    e
}

/// A point of coefficient space, optionally with a witness in the polydisc.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizedPoint {
    pub c: Vec<C64>,
    pub witness: Option<Vec<C64>>,
}

impl SymmetrizedPoint {
    pub fn from_witness(lambda: Vec<C64>) -> Self {
        Self {
            c: elementary_symmetric(&lambda),
            witness: Some(lambda),
        }
    }

    /// The monic polynomial `z^d + c_1 z^{d-1} + ... + c_d`.
    pub fn monic_polynomial(&self) -> Polynomial {
        let mut coeffs: Vec<C64> = self.c.iter().rev().copied().collect();
        coeffs.push(ONE);
        Polynomial::new(coeffs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// The tested point; on success the witness holds `lambda_j = -zero_j`.
    pub point: SymmetrizedPoint,
    /// Zeros of the monic polynomial, as found.
    pub zeros: Vec<C64>,
}

/// Tests whether all zeros of `z^d + c_1 z^{d-1} + ... + c_d` lie in the open
/// disc, i.e. whether `c` lies in the symmetrized polydisc.
pub fn in_symmetrized_polydisc(c: &[C64]) -> Result<Membership> {
    if c.is_empty() {
        return Err(Error::InvalidInput("empty coefficient tuple".into()));
    }
    let point = SymmetrizedPoint {
        c: c.to_vec(),
        witness: None,
    };
    let zeros = find_roots(&point.monic_polynomial())?;
    let inside = zeros.iter().all(|z| z.norm() < 1.0 - BOUNDARY_TOL);
    let witness = inside.then(|| zeros.iter().map(|z| -z).collect());
    Ok(Membership {
        inside,
        point: SymmetrizedPoint { witness, ..point },
        zeros,
    })
}

/// Zeros of `p` from the eigenvalues of its companion matrix, polished by
/// Newton steps. Fails when the backward error of any zero exceeds `1e-10`.
pub fn find_roots(p: &Polynomial) -> Result<Vec<C64>> {
    let d = p.degree();
    let lead = p.leading();
    if lead == ZERO {
        return Err(Error::InvalidInput("leading coefficient is zero".into()));
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let a: Vec<C64> = p.coeffs().iter().map(|&c| c / lead).collect();
    let mut comp = CMatrix::zeros(d, d);
    for j in 0..d {
        comp[(0, j)] = -a[d - 1 - j];
    }
    for i in 1..d {
        comp[(i, i - 1)] = ONE;
    }
    let schur = Schur::try_new(comp, f64::EPSILON, 100 * d.max(10)).ok_or(Error::RootFinder {
        residuals: Vec::new(),
    })?;
    let (_, t) = schur.unpack();
    let deriv = Polynomial::new((1..=d).map(|k| p.coeffs()[k] * k as f64).collect());
    let mut roots = Vec::with_capacity(d);
    let mut residuals = Vec::with_capacity(d);
    for i in 0..d {
        let mut z = t[(i, i)];
        let mut res = backward_error(p, z);
        for _ in 0..3 {
            let dp = deriv.eval(z);
            if dp == ZERO {
                break;
            }
            let cand = z - p.eval(z) / dp;
            let cres = backward_error(p, cand);
            if cres.is_nan() || cres >= res {
                break;
            }
            z = cand;
            res = cres;
        }
        roots.push(z);
        residuals.push(res);
    }
    if residuals.iter().any(|&r| r.is_nan() || r > 1e-10) {
        return Err(Error::RootFinder { residuals });
    }
    Ok(roots)
}

fn backward_error(p: &Polynomial, z: C64) -> f64 {
    let az = z.norm();
    let scale = p
        .coeffs()
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * az + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        p.eval(z).norm() / scale
    }
}

/// Default truncation order for series whose coefficients decay like `r^k`.
pub fn default_series_order(r: f64, allow_slow: bool) -> Result<usize> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidInput(alloc::format!(
            "decay ratio {r} not in [0, 1)"
        )));
    }
    if r > MAX_DEFAULT_RATIO && !allow_slow {
        return Err(Error::DecayTooSlow { ratio: r });
    }
    if r == 0.0 {
        return Ok(MIN_SERIES_ORDER);
    }
    let k = libm::ceil(libm::log(SERIES_EPS) / libm::log(r)) as usize;
    Ok(k.clamp(MIN_SERIES_ORDER, MAX_SERIES_ORDER))
}

/// Power series truncated at a fixed order `K` (coefficients `a_0..a_K`).
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<C64>,
    /// Known geometric decay `|a_k| <= C r^k`, when available.
    pub decay_ratio: Option<f64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![ZERO]
        } else {
            coeffs
        };
        Self {
            coeffs,
            decay_ratio: None,
        }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![ZERO; order + 1])
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = ONE;
        s
    }

    /// Truncates or zero-pads `p` to `order`.
    pub fn from_polynomial(p: &Polynomial, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order + 1];
        for (k, &c) in p.coeffs().iter().enumerate().take(order + 1) {
            coeffs[k] = c;
        }
        Self::new(coeffs)
    }

    pub fn with_decay(mut self, r: f64) -> Self {
        self.decay_ratio = Some(r);
        self
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
            decay_ratio: self.decay_ratio,
        }
    }

    /// Multiplies by `(a + b z)`, keeping the order.
    pub fn mul_linear(&self, a: C64, b: C64) -> Self {
        let shifted = core::iter::once(ZERO).chain(self.coeffs.iter().copied());
        Self::new(
            self.coeffs
                .iter()
                .zip(shifted)
                .map(|(&c, prev)| a * c + b * prev)
                .collect(),
        )
    }

    /// Divides by `(1 + mu z)`: `y_k = x_k - mu y_{k-1}`.
    pub fn div_unit_linear(&self, mu: C64) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut prev = ZERO;
        for &x in &self.coeffs {
            prev = x - mu * prev;
            out.push(prev);
        }
        Self::new(out)
    }
}

fn min_order(a: &PowerSeries, b: &PowerSeries) -> usize {
    a.order().min(b.order())
}

impl Add for &PowerSeries {
    type Output = PowerSeries;

    fn add(self, rhs: &PowerSeries) -> PowerSeries {
        let k = min_order(self, rhs);
        PowerSeries::new((0..=k).map(|i| self.coeffs[i] + rhs.coeffs[i]).collect())
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;

    /// Cauchy product truncated to the smaller order.
    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        let k = min_order(self, rhs);
        let mut out = vec![ZERO; k + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(k + 1) {
            if a == ZERO {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate().take(k + 1 - i) {
                out[i + j] += a * b;
            }
        }
        PowerSeries::new(out)
    }
}

/// Reciprocal through the order of `f`.
pub fn series_reciprocal(f: &PowerSeries) -> Result<PowerSeries> {
    let a0 = f.coeff(0);
    if a0 == ZERO {
        return Err(Error::ZeroConstantTerm);
    }
    let inv0 = ONE / a0;
    // last nonzero coefficient bounds the recurrence length
    let support = f.coeffs.iter().rposition(|&c| c != ZERO).unwrap_or(0);
    let mut b = Vec::with_capacity(f.coeffs.len());
    b.push(inv0);
    for k in 1..=f.order() {
        let mut acc = ZERO;
        for i in 1..=k.min(support) {
            acc += f.coeffs[i] * b[k - i];
        }
        b.push(-acc * inv0);
    }
    Ok(PowerSeries::new(b))
}

/// `1 / prod (1 + conj(lambda_j) z)` to `order`, tagged with decay
/// `max |lambda_j|`.
pub fn reciprocal_of_factors(roots: &[C64], order: usize) -> Result<PowerSeries> {
    let qbar = poly_from_roots(roots, RootForm::ConstantTerm)?;
    let r = roots.iter().fold(0.0, |acc: f64, l| acc.max(l.norm()));
    Ok(series_reciprocal(&PowerSeries::from_polynomial(&qbar, order))?.with_decay(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn single_zero_root_is_z() {
        let p = poly_from_roots(&[ZERO], RootForm::ZPower).unwrap();
        assert_eq!(p.coeffs(), &[ZERO, ONE]);
        assert!(p.is_monic());
    }

    #[test]
    fn double_root_expands() {
        let p = poly_from_roots(&[c(0.5, 0.0), c(0.5, 0.0)], RootForm::ZPower).unwrap();
        assert!(close(p.coeffs(), &[c(0.25, 0.0), ONE, ONE], 1e-15));
    }

    #[test]
    fn constant_term_form() {
        let q = poly_from_roots(&[c(0.5, 0.0)], RootForm::ConstantTerm).unwrap();
        assert!(close(q.coeffs(), &[ONE, c(0.5, 0.0)], 0.0));
        let q = poly_from_roots(&[c(0.0, 0.5)], RootForm::ConstantTerm).unwrap();
        assert!(close(q.coeffs(), &[ONE, c(0.0, -0.5)], 0.0));
    }

    #[test]
    fn constant_term_form_rejects_boundary_root() {
        let err = poly_from_roots(&[c(0.2, 0.0), c(1.0, 0.0)], RootForm::ConstantTerm).unwrap_err();
        assert!(matches!(err, Error::RootOutsideDisc { index: 1, .. }));
    }

    #[test]
    fn monic_coeffs_are_elementary_symmetric() {
        let lam = [c(0.5, 0.1), c(-0.3, 0.2), c(0.0, -0.7)];
        let p = poly_from_roots(&lam, RootForm::ZPower).unwrap();
        let e = elementary_symmetric(&lam);
        let d = lam.len();
        for k in 1..=d {
            assert!((p.coeffs()[d - k] - e[k - 1]).norm() < 1e-15);
        }
    }

    #[test]
    fn exchange_examples() {
        let p = Polynomial::new(vec![c(0.5, 0.0), ONE]);
        assert!(close(exchange_map(&p).coeffs(), &[ONE, c(0.5, 0.0)], 0.0));
        let p = Polynomial::new(vec![c(0.3, 0.2), ONE]);
        assert!(close(exchange_map(&p).coeffs(), &[ONE, c(0.3, -0.2)], 0.0));
    }

    #[test]
    fn exchange_maps_p_to_qbar() {
        let lam = [c(0.4, -0.1), c(-0.2, 0.6)];
        let p = poly_from_roots(&lam, RootForm::ZPower).unwrap();
        let qbar = poly_from_roots(&lam, RootForm::ConstantTerm).unwrap();
        assert!(close(exchange_map(&p).coeffs(), qbar.coeffs(), 1e-15));
    }

    #[test]
    fn membership_linear_cases() {
        let m = in_symmetrized_polydisc(&[c(0.5, 0.0)]).unwrap();
        assert!(m.inside);
        let w = m.point.witness.unwrap();
        assert!((w[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(!in_symmetrized_polydisc(&[ONE]).unwrap().inside);
    }

    #[test]
    fn membership_quadratic() {
        // pi_2(0.5, 0.3) = (0.8, 0.15)
        let m = in_symmetrized_polydisc(&[c(0.8, 0.0), c(0.15, 0.0)]).unwrap();
        assert!(m.inside);
        let mut w: Vec<f64> = m.point.witness.unwrap().iter().map(|z| z.re).collect();
        w.sort_by(f64::total_cmp);
        assert!((w[0] - 0.3).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn membership_rejects_empty() {
        assert!(matches!(
            in_symmetrized_polydisc(&[]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn reciprocal_examples() {
        let f = PowerSeries::new(vec![ONE, c(0.5, 0.0), ZERO, ZERO, ZERO]);
        let g = series_reciprocal(&f).unwrap();
        let want: Vec<C64> = (0..5).map(|k| c((-0.5f64).powi(k), 0.0)).collect();
        assert!(close(g.coeffs(), &want, 1e-16));
        let one = series_reciprocal(&PowerSeries::one(8)).unwrap();
        assert_eq!(one, PowerSeries::one(8));
    }

    #[test]
    fn reciprocal_of_product_matches_convolution_of_geometrics() {
        let k = 40;
        let f = &PowerSeries::from_polynomial(&Polynomial::new(vec![ONE, c(0.5, 0.0)]), k)
            * &PowerSeries::from_polynomial(&Polynomial::new(vec![ONE, c(0.2, 0.0)]), k);
        let g = series_reciprocal(&f).unwrap();
        // oracle: direct convolution of the two geometric sequences
        let want: Vec<C64> = (0..=k)
            .map(|n| {
                let s: f64 = (0..=n)
                    .map(|i| (-0.5f64).powi(i as i32) * (-0.2f64).powi((n - i) as i32))
                    .sum();
                c(s, 0.0)
            })
            .collect();
        assert!(close(g.coeffs(), &want, 1e-15));
    }

    #[test]
    fn reciprocal_rejects_zero_constant() {
        let f = PowerSeries::new(vec![ZERO, ONE]);
        assert_eq!(series_reciprocal(&f), Err(Error::ZeroConstantTerm));
    }

    #[test]
    fn reciprocal_of_factors_carries_decay() {
        let s = reciprocal_of_factors(&[c(0.3, 0.0), c(0.0, -0.6)], 40).unwrap();
        assert_eq!(s.decay_ratio, Some(0.6));
    }

    #[test]
    fn default_order_rule() {
        assert_eq!(default_series_order(0.0, false).unwrap(), 32);
        assert_eq!(default_series_order(0.5, false).unwrap(), 50);
        assert_eq!(default_series_order(0.9, false).unwrap(), 328);
        assert!(matches!(
            default_series_order(0.995, false),
            Err(Error::DecayTooSlow { .. })
        ));
        assert_eq!(default_series_order(0.9999, true).unwrap(), 4096);
    }

    #[test]
    fn linear_series_ops_match_general_ones() {
        let x = PowerSeries::new(
            (0..20)
                .map(|k| c(1.0 / (k as f64 + 1.0), 0.3 * k as f64))
                .collect(),
        );
        let mu = c(0.4, -0.3);
        let lin = PowerSeries::from_polynomial(&Polynomial::new(vec![ONE, mu]), 19);
        let via_general = &x * &series_reciprocal(&lin).unwrap();
        assert!(close(
            x.div_unit_linear(mu).coeffs(),
            via_general.coeffs(),
            1e-13
        ));
        let lin2 =
            PowerSeries::from_polynomial(&Polynomial::new(vec![c(0.2, 0.1), c(1.0, 0.5)]), 19);
        assert!(close(
            x.mul_linear(c(0.2, 0.1), c(1.0, 0.5)).coeffs(),
            (&x * &lin2).coeffs(),
            1e-14
        ));
    }
}
