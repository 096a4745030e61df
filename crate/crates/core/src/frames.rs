//! Blaschke frames `b_m = B(V*) e_m`: frame operator, the norm formula
//! through Malmquist-Takenaka derivatives at 0, redundancy classification
//! and reconstruction.
//!
//! The synthesis operator is `B(V*)` itself, the coordinatization of the
//! truncation being the identity.

use alloc::vec::Vec;

use crate::blaschke::{mt_basis, BlaschkeProduct, MtBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::operators::{
    self, apply_blaschke_adjoint, build_isometry, IsometrySpec, TruncatedOperator,
};
use crate::series::MIN_SERIES_ORDER;
use crate::wold::{wold_decompose, Part, WoldData};

/// Column norms may exceed 1 by this much before the contraction check fails.
pub const CONTRACTION_TOL: f64 = 1e-12;
/// Relative singular-value cutoff for least-squares span residuals.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FrameSystem {
    pub blaschke: BlaschkeProduct,
    pub isometry: IsometrySpec,
    pub operator_bv: TruncatedOperator,
    pub wold: WoldData,
    pub basis: MtBasis,
}

impl FrameSystem {
    pub fn dim(&self) -> usize {
        self.isometry.dim()
    }

    /// `b_m`, 1-based.
    pub fn vector(&self, m: usize) -> CVector {
        self.operator_bv.column(m)
    }

    /// Synthesis matrix; column `m` is `b_m`.
    pub fn synthesis(&self) -> &CMatrix {
        &self.operator_bv.matrix
    }

    /// Labels whose reconstruction sees every frame vector that touches
    /// them, i.e. the trusted interior at the effective depth of `B`.
    pub fn tail_safe_support(&self) -> Vec<usize> {
        self.isometry.trusted_interior(self.operator_bv.depth())
    }
}

/// Uses the default series order of `B`, raised to the deepest Wold depth.
pub fn build_frame(b: &BlaschkeProduct, spec: &IsometrySpec) -> Result<FrameSystem> {
    build_frame_with_order(b, spec, None)
}

/// As [`build_frame`] with an explicit MT series order; it must still cover
/// every depth `s(m) - 1` in the truncation.
pub fn build_frame_with_order(
    b: &BlaschkeProduct,
    spec: &IsometrySpec,
    order: Option<usize>,
) -> Result<FrameSystem> {
    let v = build_isometry(spec);
    let operator_bv = apply_blaschke_adjoint(b, &v)?;
    let wold = wold_decompose(spec);
    let needed = wold.max_depth().saturating_sub(1);
    let order = match order {
        Some(k) if k < needed => {
            return Err(Error::OrderExceeded {
                requested: needed,
                available: k,
            })
        }
        Some(k) => k,
        None => b.default_order()?.max(needed).max(MIN_SERIES_ORDER),
    };
    let basis = mt_basis(b, order)?;
    for m in 1..=spec.dim() {
        let norm = operator_bv.matrix.column(m - 1).norm();
        if norm > 1.0 + CONTRACTION_TOL {
            return Err(Error::InvariantViolation(alloc::format!(
                "|b_{m}| = {norm} exceeds 1"
            )));
        }
    }
    Ok(FrameSystem {
        blaschke: b.clone(),
        isometry: spec.clone(),
        operator_bv,
        wold,
        basis,
    })
}

/// `F = sum_m b_m b_m^*` with spectral estimates.
#[derive(Clone, Debug)]
pub struct FrameOperator {
    pub matrix: CMatrix,
    pub interior: Vec<usize>,
    /// Extreme eigenvalues on the trusted interior; `None` when it is empty.
    pub interior_bounds: Option<(f64, f64)>,
    /// Extreme eigenvalues over all labels after restoring the frame vectors
    /// `b_m`, `m > N`, that reach into the truncation.
    pub extended_bounds: (f64, f64),
}

fn spectrum_bounds(m: &CMatrix) -> Option<(f64, f64)> {
    let ev = linalg::hermitian_eigenvalues(m);
    Some((*ev.first()?, *ev.last()?))
}

pub fn frame_operator(sys: &FrameSystem) -> FrameOperator {
    let bv = &sys.operator_bv;
    let matrix = linalg::gram(&bv.matrix);
    let interior = sys.tail_safe_support();
    let interior_bounds = spectrum_bounds(&linalg::principal_submatrix(&matrix, &interior));
    let extended = operators::extended_gram(&sys.blaschke, bv);
    let extended_bounds = spectrum_bounds(&extended).unwrap_or((1.0, 1.0));
    FrameOperator {
        matrix,
        interior,
        interior_bounds,
        extended_bounds,
    }
}

/// MT Taylor coefficients `E_j^{(s-1)}(0) / (s-1)!`, `j = 1..d`, for label
/// `m`; empty on the unitary part.
pub fn derivative_row(sys: &FrameSystem, m: usize) -> Result<Vec<C64>> {
    check_label(sys, m)?;
    let Some(s) = sys.wold.depth_of(m) else {
        return Ok(Vec::new());
    };
    if s - 1 > sys.basis.order() {
        return Err(Error::OrderExceeded {
            requested: s - 1,
            available: sys.basis.order(),
        });
    }
    Ok(sys.basis.coefficient_column(s - 1))
}

fn check_label(sys: &FrameSystem, m: usize) -> Result<()> {
    if m == 0 || m > sys.dim() {
        return Err(Error::InvalidInput(alloc::format!(
            "index {m} outside 1..={}",
            sys.dim()
        )));
    }
    Ok(())
}

/// `|b_m|^2 = 1 - sum_j |E_j^{(s-1)}(0) / (s-1)!|^2`, and 1 on the unitary
/// part.
pub fn norm_formula(sys: &FrameSystem, m: usize) -> Result<f64> {
    let row = derivative_row(sys, m)?;
    Ok(1.0 - row.iter().map(|c| c.norm_sqr()).sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Christensen side: essential iff `| |b_k|^2 - 1 | < christensen`.
    pub christensen: f64,
    /// Formula side: essential iff `sum_j |c_j|^2 < formula`, with `c_j` the
    /// derivative row.
    pub formula: f64,
    /// A verdict is borderline when its quantity lies within this factor of
    /// the threshold.
    pub borderline_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            christensen: 1e-8,
            formula: 1e-8,
            borderline_factor: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameClass {
    RieszBasis,
    PartiallyRedundant,
    FullyInsured,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexRecord {
    pub m: usize,
    pub part: Part,
    pub s: Option<usize>,
    pub norm_formula: f64,
    pub norm_direct: f64,
    /// Formula verdict.
    pub redundant: bool,
    pub redundant_christensen: bool,
    pub derivative_row: Vec<C64>,
    /// Decades between the nearer of the two tested quantities and its
    /// threshold.
    pub margin: f64,
    pub borderline: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsevalBounds {
    pub lower: f64,
    pub upper: f64,
    /// Whether the bounds come from the trusted interior (otherwise from the
    /// extended frame operator).
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub per_index: Vec<IndexRecord>,
    pub frame_class: FrameClass,
    pub parseval: ParsevalBounds,
    /// Labels where the two verdicts differ.
    pub disagreements: Vec<usize>,
    pub tolerances: Tolerances,
}

impl FrameReport {
    pub fn redundant_set(&self) -> Vec<usize> {
        self.per_index
            .iter()
            .filter(|r| r.redundant)
            .map(|r| r.m)
            .collect()
    }

    pub fn borderline_set(&self) -> Vec<usize> {
        self.per_index
            .iter()
            .filter(|r| r.borderline)
            .map(|r| r.m)
            .collect()
    }

    /// Turns a verdict disagreement into an error naming the first index.
    pub fn check_agreement(&self) -> Result<()> {
        match self.disagreements.first() {
            None => Ok(()),
            Some(&m) => {
                let r = &self.per_index[m - 1];
                Err(Error::InvariantViolation(alloc::format!(
                    "index {m}: formula says {}, Christensen says {} (|b|^2 = {:e}, formula {:e})",
                    verdict(r.redundant),
                    verdict(r.redundant_christensen),
                    r.norm_direct,
                    r.norm_formula
                )))
            }
        }
    }
}

fn verdict(redundant: bool) -> &'static str {
    if redundant {
        "redundant"
    } else {
        "essential"
    }
}

/// `|log10(x / threshold)|`, with zero floored at the smallest normal.
fn decades(x: f64, threshold: f64) -> f64 {
    libm::log10(x.max(f64::MIN_POSITIVE) / threshold).abs()
}

pub fn classify_redundancy(sys: &FrameSystem, tol: &Tolerances) -> Result<FrameReport> {
    let n = sys.dim();
    let mut per_index = Vec::with_capacity(n);
    for m in 1..=n {
        let row = derivative_row(sys, m)?;
        let defect: f64 = row.iter().map(|c| c.norm_sqr()).sum();
        let norm_formula = 1.0 - defect;
        let norm_direct = sys.operator_bv.matrix.column(m - 1).norm_squared();
        let deviation = (norm_direct - 1.0).abs();
        let redundant = defect >= tol.formula;
        let redundant_christensen = deviation >= tol.christensen;
        let margin = decades(defect, tol.formula).min(decades(deviation, tol.christensen));
        per_index.push(IndexRecord {
            m,
            part: sys.wold.part_of(m),
            s: sys.wold.depth_of(m),
            norm_formula,
            norm_direct,
            redundant,
            redundant_christensen,
            derivative_row: row,
            margin,
            borderline: margin < libm::log10(tol.borderline_factor),
        });
    }
    let disagreements = per_index
        .iter()
        .filter(|r| r.redundant != r.redundant_christensen)
        .map(|r| r.m)
        .collect();
    let redundant = per_index.iter().filter(|r| r.redundant).count();
    let frame_class = if redundant == 0 {
        FrameClass::RieszBasis
    } else if redundant == n {
        FrameClass::FullyInsured
    } else {
        FrameClass::PartiallyRedundant
    };
    let op = frame_operator(sys);
    let parseval = match op.interior_bounds {
        Some((lower, upper)) => ParsevalBounds {
            lower,
            upper,
            interior: true,
        },
        None => ParsevalBounds {
            lower: op.extended_bounds.0,
            upper: op.extended_bounds.1,
            interior: false,
        },
    };
    Ok(FrameReport {
        per_index,
        frame_class,
        parseval,
        disagreements,
        tolerances: *tol,
    })
}

/// Rejects `f` with weight outside [`FrameSystem::tail_safe_support`].
pub fn check_tail_safe(sys: &FrameSystem, f: &CVector) -> Result<()> {
    if f.len() != sys.dim() {
        return Err(Error::InvalidInput(alloc::format!(
            "vector has length {}, expected {}",
            f.len(),
            sys.dim()
        )));
    }
    let support = sys.tail_safe_support();
    let bound = support.last().copied().unwrap_or(0);
    let mut inside = alloc::vec![false; sys.dim()];
    for &m in &support {
        inside[m - 1] = true;
    }
    match (0..f.len()).find(|&i| f[i] != C64::new(0.0, 0.0) && !inside[i]) {
        Some(i) => Err(Error::Support {
            index: i + 1,
            bound,
        }),
        None => Ok(()),
    }
}

/// `sum_m |<f, b_m>|^2`.
pub fn frame_energy(sys: &FrameSystem, f: &CVector) -> f64 {
    (sys.synthesis().adjoint() * f).norm_squared()
}

/// `(min|q|/max|q|)^2 <= sum |<f, b_m>|^2 / |f|^2 <= (max|q|/min|q|)^2` with
/// `q = prod (1 + conj(l_j) z)`: a weaker Bessel bracket than Parseval.
pub fn bessel_bracket(b: &BlaschkeProduct) -> (f64, f64) {
    if b.degree() == 0 {
        return (1.0, 1.0);
    }
    let (lo, hi) = operators::boundary_extrema(&b.denominator(), operators::BOUNDARY_SAMPLES);
    let r = (lo / hi) * (lo / hi);
    (r, 1.0 / r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    /// Parseval synthesis `sum <f, b_m> b_m` without a drop, otherwise the
    /// least-squares approximation from the remaining vectors.
    pub reconstruction: CVector,
    /// `|f - sum <f, b_m> b_m|` over all frame vectors.
    pub parseval_error: f64,
    /// Least-squares residual after deleting `drop`; `None` without a drop.
    pub span_residual: Option<f64>,
    pub drop: Vec<usize>,
    /// Formula verdict of each dropped index.
    pub drop_redundant: Vec<bool>,
    /// Label of the largest residual component when an essential index was
    /// dropped.
    pub witness: Option<usize>,
    /// Several indices dropped at once: not covered by the single-deletion
    /// theorem.
    pub experimental: bool,
}

impl Reconstruction {
    /// The headline error: span residual with a drop, Parseval error without.
    pub fn error(&self) -> f64 {
        self.span_residual.unwrap_or(self.parseval_error)
    }
}

pub fn reconstruct(
    sys: &FrameSystem,
    f: &CVector,
    drop: &[usize],
    tol: &Tolerances,
) -> Result<Reconstruction> {
    check_tail_safe(sys, f)?;
    let n = sys.dim();
    let mut drop: Vec<usize> = drop.to_vec();
    drop.sort_unstable();
    drop.dedup();
    for &m in &drop {
        check_label(sys, m)?;
    }
    let bv = sys.synthesis();
    let synth = bv * (bv.adjoint() * f);
    let parseval_error = (f - &synth).norm();
    if drop.is_empty() {
        return Ok(Reconstruction {
            reconstruction: synth,
            parseval_error,
            span_residual: None,
            drop,
            drop_redundant: Vec::new(),
            witness: None,
            experimental: false,
        });
    }
    let mut drop_redundant = Vec::with_capacity(drop.len());
    for &m in &drop {
        let row = derivative_row(sys, m)?;
        drop_redundant.push(row.iter().map(|c| c.norm_sqr()).sum::<f64>() >= tol.formula);
    }
    let keep: Vec<usize> = (1..=n).filter(|m| drop.binary_search(m).is_err()).collect();
    let cols: Vec<CVector> = keep
        .iter()
        .map(|&m| bv.column(m - 1).into_owned())
        .collect();
    let a = if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    };
    let residual = linalg::span_residual(&a, f, RANK_TOL);
    let witness = if drop_redundant.iter().all(|&r| r) {
        None
    } else {
        residual
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .map(|(i, _)| i + 1)
    };
    Ok(Reconstruction {
        reconstruction: f - &residual,
        parseval_error,
        span_residual: Some(residual.norm()),
        experimental: drop.len() > 1,
        drop,
        drop_redundant,
        witness,
    })
}

/// Closed form `1 - (1 - |l|^2) |l|^{2(m-1)}` for a single root on the
/// right shift.
pub fn single_root_norm(lambda: C64, m: usize) -> f64 {
    let r2 = lambda.norm_sqr();
    1.0 - (1.0 - r2) * libm::pow(r2, (m - 1) as f64)
}
