//! Truncated isometries on `span{e_1..e_N}` and the functional calculus
//! `B(V*)` built on them.
//!
//! Every supported isometry maps basis vectors to unimodular multiples of
//! basis vectors, `V e_m = w_m e_{sigma(m)}`. The adjoint only moves down the
//! orbits, so `V*` is exact on the truncation; expressions involving `V`
//! itself are exact only on [`TruncatedOperator::trusted_interior`].
//!
//! Basis labels `m` are 1-based throughout.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};
use crate::series::{in_symmetrized_polydisc, Polynomial};

/// Taylor coefficients of `B` below this are treated as the end of the series
/// when sizing trusted interiors.
pub const DEPTH_EPS: f64 = 1e-15;
/// Allowed entrywise gap between the solved and Neumann factor inverses.
pub const NEUMANN_TOL: f64 = 1e-12;
/// Boundary samples for `min |q|` and `max |q|`.
pub const BOUNDARY_SAMPLES: usize = 720;
pub const DEFAULT_CONTOUR_NODES: usize = 512;
pub const MIN_CONTOUR_NODES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftKind {
    /// `S e_m = e_{m+1}`.
    Right,
    /// `M_p e_m = e_{pm}` for a prime `p`.
    Mult(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum IsometryKind {
    RightShift,
    MultShift {
        p: usize,
    },
    DiagonalUnitary {
        phases: Vec<f64>,
    },
    /// Unitary diagonal block on labels `1..=phases.len()`, shift on the rest.
    WoldSum {
        unitary_phases: Vec<f64>,
        shift: ShiftKind,
    },
}

/// Symbolic isometry together with its truncation size `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometrySpec {
    kind: IsometryKind,
    dim: usize,
}

fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_shift_block(shift: ShiftKind, size: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::InvalidSpec("shift block is empty".into()));
    }
    if let ShiftKind::Mult(p) = shift {
        if !is_prime(p) {
            return Err(Error::InvalidSpec(format!(
                "multiplier p = {p} is not prime"
            )));
        }
        if size < p * p {
            return Err(Error::InvalidSpec(format!(
                "shift block of size {size} is smaller than p^2 = {}",
                p * p
            )));
        }
    }
    Ok(())
}

impl IsometrySpec {
    pub fn new(kind: IsometryKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        match &kind {
            IsometryKind::RightShift => {}
            IsometryKind::MultShift { p } => check_shift_block(ShiftKind::Mult(*p), dim)?,
            IsometryKind::DiagonalUnitary { phases } => {
                if phases.len() != dim {
                    return Err(Error::InvalidSpec(format!(
                        "{} phases given for dimension {dim}",
                        phases.len()
                    )));
                }
                if phases.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidSpec("phases must be finite".into()));
                }
            }
            IsometryKind::WoldSum {
                unitary_phases,
                shift,
            } => {
                if unitary_phases.len() >= dim {
                    return Err(Error::InvalidSpec(format!(
                        "unitary block {} leaves no room for the shift in dimension {dim}",
                        unitary_phases.len()
                    )));
                }
                if unitary_phases.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidSpec("phases must be finite".into()));
                }
                check_shift_block(*shift, dim - unitary_phases.len())?;
            }
        }
        Ok(Self { kind, dim })
    }

    pub fn right_shift(dim: usize) -> Result<Self> {
        Self::new(IsometryKind::RightShift, dim)
    }

    pub fn mult_shift(p: usize, dim: usize) -> Result<Self> {
        Self::new(IsometryKind::MultShift { p }, dim)
    }

    pub fn diagonal_unitary(phases: Vec<f64>) -> Result<Self> {
        let dim = phases.len();
        Self::new(IsometryKind::DiagonalUnitary { phases }, dim)
    }

    pub fn wold_sum(unitary_phases: Vec<f64>, shift: ShiftKind, dim: usize) -> Result<Self> {
        Self::new(
            IsometryKind::WoldSum {
                unitary_phases,
                shift,
            },
            dim,
        )
    }

    pub fn kind(&self) -> &IsometryKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of leading labels in the unitary part.
    pub fn unitary_dim(&self) -> usize {
        match &self.kind {
            IsometryKind::DiagonalUnitary { phases } => phases.len(),
            IsometryKind::WoldSum { unitary_phases, .. } => unitary_phases.len(),
            _ => 0,
        }
    }

    /// Whether `V*` is nilpotent on the truncation.
    pub fn is_pure_shift(&self) -> bool {
        matches!(
            self.kind,
            IsometryKind::RightShift | IsometryKind::MultShift { .. }
        )
    }

    pub fn is_pure(&self) -> bool {
        self.unitary_dim() == 0
    }

    fn shift_kind(&self) -> Option<ShiftKind> {
        match &self.kind {
            IsometryKind::RightShift => Some(ShiftKind::Right),
            IsometryKind::MultShift { p } => Some(ShiftKind::Mult(*p)),
            IsometryKind::DiagonalUnitary { .. } => None,
            IsometryKind::WoldSum { shift, .. } => Some(*shift),
        }
    }

    fn phase(&self, m: usize) -> f64 {
        match &self.kind {
            IsometryKind::DiagonalUnitary { phases } => phases[m - 1],
            IsometryKind::WoldSum { unitary_phases, .. } => unitary_phases[m - 1],
            _ => 0.0,
        }
    }

    /// `V e_m = w e_{label}` on the untruncated space.
    pub fn image(&self, m: usize) -> (usize, C64) {
        let u = self.unitary_dim();
        if m <= u {
            return (m, C64::from_polar(1.0, self.phase(m)));
        }
        let local = m - u;
        let next = match self.shift_kind().expect("shift part present") {
            ShiftKind::Right => local + 1,
            ShiftKind::Mult(p) => local.saturating_mul(p),
        };
        (u.saturating_add(next), ONE)
    }

    /// `V* e_m = w e_{label}`, or `None` when `e_m` spans part of `Ker V*`.
    pub fn preimage(&self, m: usize) -> Option<(usize, C64)> {
        let u = self.unitary_dim();
        if m <= u {
            return Some((m, C64::from_polar(1.0, -self.phase(m))));
        }
        let local = m - u;
        match self.shift_kind().expect("shift part present") {
            ShiftKind::Right => (local > 1).then(|| (u + local - 1, ONE)),
            ShiftKind::Mult(p) => local.is_multiple_of(p).then(|| (u + local / p, ONE)),
        }
    }

    /// Labels `m` for which `V^j e_m` stays inside the truncation for all
    /// `j <= k`.
    pub fn trusted_interior(&self, k: usize) -> Vec<usize> {
        let u = self.unitary_dim();
        let mut out: Vec<usize> = (1..=u.min(self.dim)).collect();
        for m in u + 1..=self.dim {
            let local = m - u;
            let ok = match self.shift_kind().expect("shift part present") {
                ShiftKind::Right => local.checked_add(k).is_some_and(|e| u + e <= self.dim),
                ShiftKind::Mult(p) => {
                    let mut cur = local;
                    let mut steps = 0;
                    while steps < k && u + cur <= self.dim {
                        cur = cur.saturating_mul(p);
                        steps += 1;
                    }
                    u + cur <= self.dim
                }
            };
            if ok {
                out.push(m);
            }
        }
        out
    }

    /// Smallest truncation whose trusted interior at depth `k` reaches past
    /// the unitary block.
    pub fn minimal_dim(&self, k: usize) -> usize {
        let u = self.unitary_dim();
        match self.shift_kind() {
            None => self.dim,
            Some(ShiftKind::Right) => u.saturating_add(k).saturating_add(1),
            Some(ShiftKind::Mult(p)) => {
                let mut n: usize = 1;
                for _ in 0..k {
                    n = n.saturating_mul(p);
                }
                u.saturating_add(n)
            }
        }
    }
}

/// Dense `N x N` matrix attached to the isometry it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    pub matrix: CMatrix,
    spec: IsometrySpec,
    depth: usize,
}

impl TruncatedOperator {
    pub fn spec(&self) -> &IsometrySpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// How many applications of `V` the entries of this operator reach
    /// through; sizes the trusted interior.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `V*` maps the truncation into itself exactly for every supported kind.
    pub fn exact_adjoint_action(&self) -> bool {
        true
    }

    pub fn trusted_interior(&self, k: usize) -> Vec<usize> {
        self.spec.trusted_interior(k)
    }

    pub fn column(&self, m: usize) -> CVector {
        self.matrix.column(m - 1).into_owned()
    }

    pub fn adjoint(&self) -> CMatrix {
        self.matrix.adjoint()
    }
}

pub fn build_isometry(spec: &IsometrySpec) -> TruncatedOperator {
    let n = spec.dim;
    let mut matrix = CMatrix::zeros(n, n);
    for m in 1..=n {
        let (to, w) = spec.image(m);
        if to <= n {
            matrix[(to - 1, m - 1)] = w;
        }
    }
    TruncatedOperator {
        matrix,
        spec: spec.clone(),
        depth: 1,
    }
}

/// `V* X` using the orbit structure instead of a dense product.
pub fn apply_adjoint(spec: &IsometrySpec, x: &CMatrix) -> CMatrix {
    let n = spec.dim;
    let mut out = CMatrix::zeros(n, x.ncols());
    for m in 1..=n {
        let (to, w) = spec.image(m);
        if to <= n {
            let row = x.row(to - 1) * w.conj();
            out.row_mut(m - 1).copy_from(&row);
        }
    }
    out
}

/// `(1 + conj(lambda) V*)^{-1}` as the terminating sum of `(-conj(lambda) V*)^k`.
///
/// `None` unless `V*` is nilpotent on the truncation.
pub fn neumann_factor_inverse(spec: &IsometrySpec, lambda: C64) -> Option<CMatrix> {
    if !spec.is_pure_shift() {
        return None;
    }
    let n = spec.dim;
    let step = -lambda.conj();
    let mut sum = CMatrix::identity(n, n);
    // (V*^k)[m, sigma^k(m)] is the conjugated phase product along the orbit
    for m in 1..=n {
        let (mut label, mut coeff) = (m, ONE);
        loop {
            let (next, w) = spec.image(label);
            if next > n {
                break;
            }
            coeff *= step * w.conj();
            label = next;
            sum[(m - 1, label - 1)] += coeff;
        }
    }
    Some(sum)
}

/// `x V*` without forming `V*`: column `image(i)` of the product receives
/// `conj(w_i)` times column `i` of `x`.
pub fn right_apply_adjoint(spec: &IsometrySpec, x: &CMatrix) -> CMatrix {
    let n = spec.dim;
    let mut out = CMatrix::zeros(x.nrows(), n);
    for i in 1..=n {
        let (to, w) = spec.image(i);
        if to <= n {
            let col = x.column(i - 1) * w.conj();
            out.column_mut(to - 1).copy_from(&col);
        }
    }
    out
}

/// Solves `(a + b V*) x = rhs` by back substitution.
///
/// Row `m` of `V*` has its only entry in column `image(m) >= m`, so the
/// operator is upper triangular in label order with at most two entries
/// per row.
pub fn solve_shifted(
    spec: &IsometrySpec,
    a: C64,
    b: C64,
    rhs: CMatrix,
    what: &'static str,
) -> Result<CMatrix> {
    let n = spec.dim;
    let mut x = rhs;
    for m in (1..=n).rev() {
        let (to, w) = spec.image(m);
        let off = b * w.conj();
        let diag = if to == m { a + off } else { a };
        if diag == ZERO {
            return Err(Error::Singular(what));
        }
        if to != m && to <= n {
            let tail = x.row(to - 1) * off;
            let mut row = x.row_mut(m - 1);
            row -= tail;
        }
        let mut row = x.row_mut(m - 1);
        row /= diag;
    }
    Ok(x)
}

/// `(V* + lambda)(1 + conj(lambda) V*)^{-1}` by direct solve.
pub fn blaschke_factor(v: &TruncatedOperator, lambda: C64) -> Result<CMatrix> {
    let n = v.dim();
    let num = v.adjoint() + CMatrix::identity(n, n) * lambda;
    // the two factors commute, so the left solve gives the same operator
    solve_shifted(&v.spec, ONE, lambda.conj(), num, "1 + conj(lambda) V*")
}

/// `B(V*) = tau * prod_j (V* + l_j)(1 + conj(l_j) V*)^{-1}`, factor by factor.
///
/// For pure shifts each solved factor is checked against the finite Neumann
/// sum; a mismatch above [`NEUMANN_TOL`] is an invariant violation.
pub fn apply_blaschke_adjoint(
    b: &BlaschkeProduct,
    v: &TruncatedOperator,
) -> Result<TruncatedOperator> {
    let n = v.dim();
    let mut acc = CMatrix::identity(n, n) * b.tau();
    for (j, &lam) in b.roots().iter().enumerate() {
        if let Some(inv) = neumann_factor_inverse(&v.spec, lam) {
            let alt = right_apply_adjoint(&v.spec, &inv) + inv * lam;
            let gap = linalg::max_abs_entry(&(&alt - blaschke_factor(v, lam)?));
            if gap > NEUMANN_TOL {
                return Err(Error::InvariantViolation(format!(
                    "factor {}: solved and Neumann inverses differ by {gap:e}",
                    j + 1
                )));
            }
        }
        let num = apply_adjoint(&v.spec, &acc) + &acc * lam;
        acc = solve_shifted(&v.spec, ONE, lam.conj(), num, "1 + conj(lambda) V*")?;
    }
    Ok(TruncatedOperator {
        matrix: acc,
        spec: v.spec.clone(),
        depth: b.effective_depth(DEPTH_EPS),
    })
}

/// Operator norm of `B B* - I` restricted to `trusted_interior(BV.depth())`.
pub fn coisometry_defect(bv: &TruncatedOperator, v: &TruncatedOperator) -> Result<f64> {
    let depth = bv.depth();
    let interior = v.trusted_interior(depth);
    if interior.is_empty() {
        return Err(Error::DimensionTooSmall {
            depth,
            minimal_n: v.spec.minimal_dim(depth),
        });
    }
    let n = bv.dim();
    let gram = linalg::gram(&bv.matrix) - CMatrix::identity(n, n);
    Ok(linalg::operator_norm(&linalg::principal_submatrix(
        &gram, &interior,
    )))
}

/// Gram matrix `B B*` on all `N` labels including the contributions of the
/// columns `m > N` of the untruncated operator.
///
/// Column `sigma^k(i)` of `B(V*)` has entry `beta_k * conj(w)` in row `i`,
/// where `w` is the product of the phases along the orbit; only columns
/// beyond `N` are missing from the truncation and they are added here from
/// the Taylor coefficients of `B`. Columns are keyed by the orbit generator
/// and the distance from it, since labels far out overflow `usize`.
pub fn extended_gram(b: &BlaschkeProduct, bv: &TruncatedOperator) -> CMatrix {
    let spec = &bv.spec;
    let n = spec.dim;
    let depth = bv.depth().max(1);
    let beta = b.taylor(depth);
    let mut outside: BTreeMap<(usize, usize), Vec<(usize, C64)>> = BTreeMap::new();
    for i in 1..=n {
        if spec.image(i).0 == i {
            // unitary part never leaves the truncation
            continue;
        }
        let (mut generator, mut offset) = (i, 0);
        while let Some((prev, _)) = spec.preimage(generator) {
            generator = prev;
            offset += 1;
        }
        let mut label = i;
        let mut phase = ONE;
        for k in 1..=depth {
            let (next, w) = spec.image(label);
            phase *= w;
            label = next;
            if label > n {
                outside
                    .entry((generator, offset + k))
                    .or_default()
                    .push((i, beta.coeff(k) * phase.conj()));
            }
        }
    }
    let mut gram = linalg::gram(&bv.matrix);
    for entries in outside.values() {
        for &(i, a) in entries {
            for &(j, c) in entries {
                gram[(i - 1, j - 1)] += a * c.conj();
            }
        }
    }
    gram
}

/// Operator norm of `B B* - I` over all `N` labels, with the missing
/// columns restored by [`extended_gram`].
pub fn coisometry_defect_extended(b: &BlaschkeProduct, bv: &TruncatedOperator) -> f64 {
    let n = bv.dim();
    linalg::operator_norm(&(extended_gram(b, bv) - CMatrix::identity(n, n)))
}

/// `(V* + lambda)^dagger = (V + conj lambda)[(V* + lambda)(V + conj lambda)]^{-1}`.
///
/// The inner operator is formed as `(1 + |lambda|^2) + lambda V + conj(lambda) V*`
/// using `V* V = I`. Its compression is positive definite, and
/// `(V* + lambda) X = I` holds exactly on the rows of `trusted_interior(1)`.
pub fn right_inverse_factor(v: &TruncatedOperator, lambda: C64) -> Result<TruncatedOperator> {
    let modulus = lambda.norm();
    if modulus.is_nan() || modulus >= 1.0 {
        return Err(Error::RootOutsideDisc { index: 0, modulus });
    }
    let n = v.dim();
    let id = CMatrix::identity(n, n);
    let right = &v.matrix + &id * lambda.conj();
    let inner = &id * C64::new(1.0 + lambda.norm_sqr(), 0.0)
        + &v.matrix * lambda
        + v.adjoint() * lambda.conj();
    let inner_inv = linalg::inverse(&inner, "(V* + lambda)(V + conj lambda)")?;
    Ok(TruncatedOperator {
        matrix: linalg::matmul(&right, &inner_inv),
        spec: v.spec.clone(),
        depth: 1,
    })
}

/// Operator norm of `A X - I` on the trusted interior of depth `x.depth()`.
pub fn right_inverse_residual(a: &CMatrix, x: &TruncatedOperator) -> f64 {
    let n = x.dim();
    let r = linalg::matmul(a, &x.matrix) - CMatrix::identity(n, n);
    let interior = x.trusted_interior(x.depth());
    linalg::operator_norm(&linalg::principal_submatrix(&r, &interior))
}

/// `B^dagger(V*) = conj(tau) qbar(V*) prod_j (V* + l_j)^dagger`, a right
/// inverse of `B(V*)` on `trusted_interior(d)`.
pub fn blaschke_right_inverse(
    b: &BlaschkeProduct,
    v: &TruncatedOperator,
) -> Result<TruncatedOperator> {
    let n = v.dim();
    let vstar = v.adjoint();
    let qbar = poly_of_matrix(&b.denominator(), &vstar);
    // p = A_1 ... A_d, so p^dagger = A_d^dagger ... A_1^dagger
    let mut p_dagger = CMatrix::identity(n, n);
    for &lam in b.roots() {
        p_dagger = linalg::matmul(&right_inverse_factor(v, lam)?.matrix, &p_dagger);
    }
    Ok(TruncatedOperator {
        matrix: qbar * p_dagger * b.tau().conj(),
        spec: v.spec.clone(),
        depth: b.degree(),
    })
}

/// `q(M)` by Horner's rule.
pub fn poly_of_matrix(q: &Polynomial, m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let id = CMatrix::identity(n, n);
    q.coeffs()
        .iter()
        .rev()
        .fold(CMatrix::zeros(n, n), |acc, &c| acc * m + &id * c)
}

/// Circle radius and node count used when none are given: the geometric mean
/// of 1 and the nearest pole modulus.
pub fn default_contour(b: &BlaschkeProduct) -> (f64, usize) {
    let r = b.max_modulus();
    let radius = if r > 0.0 { libm::sqrt(1.0 / r) } else { 2.0 };
    (radius, DEFAULT_CONTOUR_NODES)
}

/// Trapezoidal quadrature of `(1/2 pi i) \oint B(z)(z - V*)^{-1} dz` on
/// `|z| = radius`. Independent of the factorized construction.
pub fn riesz_dunford_contour(
    b: &BlaschkeProduct,
    v: &TruncatedOperator,
    radius: f64,
    nodes: usize,
) -> Result<TruncatedOperator> {
    let r = b.max_modulus();
    let max = if r > 0.0 { 1.0 / r } else { f64::INFINITY };
    if !(radius > 1.0 && radius < max) {
        return Err(Error::ContourRadius {
            radius,
            min: 1.0,
            max,
        });
    }
    if nodes < MIN_CONTOUR_NODES {
        return Err(Error::InvalidInput(format!(
            "{nodes} contour nodes, need at least {MIN_CONTOUR_NODES}"
        )));
    }
    let n = v.dim();
    let id = CMatrix::identity(n, n);
    let mut acc = CMatrix::zeros(n, n);
    for k in 0..nodes {
        let z = C64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
        // dz = i z dtheta, and the 1/(2 pi i) cancels against the step
        let weight = b.evaluate(z)? * z / nodes as f64;
        let resolvent = solve_shifted(&v.spec, z, -ONE, id.clone(), "z - V*")?;
        acc += resolvent * weight;
    }
    Ok(TruncatedOperator {
        matrix: acc,
        spec: v.spec.clone(),
        depth: b.effective_depth(DEPTH_EPS),
    })
}

/// `(min |q|, max |q|)` over the unit circle: best of `samples` equispaced
/// points, refined by golden-section search between the neighbours.
pub fn boundary_extrema(q: &Polynomial, samples: usize) -> (f64, f64) {
    let f = |t: f64| q.eval(C64::from_polar(1.0, t)).norm();
    let h = 2.0 * PI / samples as f64;
    let grid: Vec<f64> = (0..samples).map(|k| f(k as f64 * h)).collect();
    let argbest = |better: &dyn Fn(f64, f64) -> bool| {
        let mut best = 0;
        for (k, &v) in grid.iter().enumerate() {
            if better(v, grid[best]) {
                best = k;
            }
        }
        best
    };
    let kmin = argbest(&|a, b| a < b);
    let kmax = argbest(&|a, b| a > b);
    let refine = |k: usize, sign: f64| {
        let g = |t: f64| sign * f(t);
        let (mut a, mut b) = ((k as f64 - 1.0) * h, (k as f64 + 1.0) * h);
        let ratio = (libm::sqrt(5.0) - 1.0) / 2.0;
        for _ in 0..80 {
            let c = b - ratio * (b - a);
            let d = a + ratio * (b - a);
            if g(c) < g(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b))
    };
    let lo = refine(kmin, 1.0).min(grid[kmin]);
    let hi = refine(kmax, -1.0).max(grid[kmax]);
    (lo, hi)
}

fn check_q(q: &Polynomial) -> Result<()> {
    if q.coeffs()[0] != ONE {
        return Err(Error::InvalidInput("q must have constant term 1".into()));
    }
    if q.degree() == 0 {
        return Ok(());
    }
    let c = &q.coeffs()[1..];
    if !in_symmetrized_polydisc(c)?.inside {
        return Err(Error::NotInSymmetrizedPolydisc(c.to_vec()));
    }
    Ok(())
}

/// Vectors `q(V) e_m` on the trusted interior and the bracket
/// `min |q| <= |q(V) e_m| <= max |q|`.
#[derive(Clone, Debug)]
pub struct RieszCheck {
    pub labels: Vec<usize>,
    pub vectors: Vec<CVector>,
    pub norms: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    /// Largest excursion of a norm outside `[lower, upper]`, 0 when inside.
    pub worst_violation: f64,
}

fn bracket_violation(norms: &[f64], lower: f64, upper: f64) -> f64 {
    norms
        .iter()
        .map(|&x| (lower - x).max(x - upper).max(0.0))
        .fold(0.0, f64::max)
}

pub fn riesz_basis_vectors_q(v: &TruncatedOperator, q: &Polynomial) -> Result<RieszCheck> {
    check_q(q)?;
    let qv = poly_of_matrix(q, &v.matrix);
    let labels = v.trusted_interior(q.degree());
    let vectors: Vec<CVector> = labels
        .iter()
        .map(|&m| qv.column(m - 1).into_owned())
        .collect();
    let norms: Vec<f64> = vectors.iter().map(|x| x.norm()).collect();
    let (lower, upper) = boundary_extrema(q, BOUNDARY_SAMPLES);
    let worst_violation = bracket_violation(&norms, lower, upper);
    Ok(RieszCheck {
        labels,
        vectors,
        norms,
        lower,
        upper,
        worst_violation,
    })
}

/// Dual system `y_m = (q(V)*)^{-1} e_m` with its biorthogonality residual on
/// the trusted interior and the bracket `1/max|q| <= |y_m| <= 1/min|q|`.
#[derive(Clone, Debug)]
pub struct DualCheck {
    /// Columns are `y_1..y_N`.
    pub vectors: CMatrix,
    pub norms: Vec<f64>,
    pub interior: Vec<usize>,
    /// `max |<q(V) e_i, y_j> - delta_ij|` over interior `i` and all `j`.
    pub biorthogonality: f64,
    pub lower: f64,
    pub upper: f64,
    pub worst_violation: f64,
}

pub fn dual_riesz_basis_q(v: &TruncatedOperator, q: &Polynomial) -> Result<DualCheck> {
    check_q(q)?;
    let n = v.dim();
    let qv = poly_of_matrix(q, &v.matrix);
    let y = linalg::inverse(&qv.adjoint(), "q(V)*")?;
    let interior = v.trusted_interior(q.degree());
    // (Y^H Q)_{j,i} = <q(V) e_i, y_j>
    let pairing = linalg::matmul(&y.adjoint(), &qv);
    let mut biorthogonality = 0.0_f64;
    for &i in &interior {
        for j in 1..=n {
            let target = if i == j { ONE } else { ZERO };
            biorthogonality = biorthogonality.max((pairing[(j - 1, i - 1)] - target).norm());
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| y.column(j).norm()).collect();
    let (qmin, qmax) = boundary_extrema(q, BOUNDARY_SAMPLES);
    let (lower, upper) = (1.0 / qmax, 1.0 / qmin);
    let worst_violation = bracket_violation(&norms, lower, upper);
    Ok(DualCheck {
        vectors: y,
        norms,
        interior,
        biorthogonality,
        lower,
        upper,
        worst_violation,
    })
}

/// `q(z) = 1 + c_1 z + ... + c_d z^d` from the roots of `B`, i.e. the
/// reversal of `p(z) = prod (z + l_j)`.
pub fn q_from_roots(roots: &[C64]) -> Polynomial {
    let mut coeffs: Vec<C64> = vec![ONE];
    coeffs.extend(crate::series::elementary_symmetric(roots));
    Polynomial::new(coeffs)
}
