//! Verification suites, one per family of invariants.

use std::fmt;

use blaschke_core::blaschke::{model_identity_residual, mt_basis};
use blaschke_core::frames::{
    bessel_bracket, build_frame_with_order, classify_redundancy, frame_energy, norm_formula,
    FrameSystem,
};
use blaschke_core::linalg::{self, CMatrix, CVector};
use blaschke_core::operators::{
    apply_blaschke_adjoint, blaschke_right_inverse, build_isometry, coisometry_defect,
    coisometry_defect_extended, default_contour, dual_riesz_basis_q, q_from_roots,
    riesz_basis_vectors_q, riesz_dunford_contour, right_inverse_factor, right_inverse_residual,
    IsometryKind,
};
use blaschke_core::wold::{verify_wandering, wold_decompose};
use blaschke_core::{Error as CoreError, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Resolved;
use crate::error::ExitStatus;

pub const MODEL_IDENTITY_TOL: f64 = 1e-12;
pub const MT_GRAM_TOL: f64 = 1e-10;
pub const COISOMETRY_TOL: f64 = 1e-10;
pub const UNITARY_COISOMETRY_TOL: f64 = 1e-12;
pub const PARSEVAL_TOL: f64 = 1e-8;
pub const NORM_FORMULA_TOL: f64 = 1e-10;
pub const CONTOUR_TOL: f64 = 1e-8;
pub const RIESZ_SLACK: f64 = 1e-10;
pub const BIORTHOGONALITY_TOL: f64 = 1e-10;
pub const RIGHT_INVERSE_TOL: f64 = 1e-9;
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Suite {
    ModelIdentity,
    MtOrthonormality,
    CoIsometry,
    Parseval,
    Norms,
    Redundancy,
    ContourOracle,
    RieszBounds,
    DualBasis,
    RightInverse,
    Wandering,
    All,
}

impl Suite {
    pub const EACH: [Suite; 11] = [
        Suite::ModelIdentity,
        Suite::MtOrthonormality,
        Suite::CoIsometry,
        Suite::Parseval,
        Suite::Norms,
        Suite::Redundancy,
        Suite::ContourOracle,
        Suite::RieszBounds,
        Suite::DualBasis,
        Suite::RightInverse,
        Suite::Wandering,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ModelIdentity => "model-identity",
            Suite::MtOrthonormality => "mt-orthonormality",
            Suite::CoIsometry => "co-isometry",
            Suite::Parseval => "parseval",
            Suite::Norms => "norms",
            Suite::Redundancy => "redundancy",
            Suite::ContourOracle => "contour-oracle",
            Suite::RieszBounds => "riesz-bounds",
            Suite::DualBasis => "dual-basis",
            Suite::RightInverse => "right-inverse",
            Suite::Wandering => "wandering",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::EACH.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this configuration.
    Skipped,
    /// The configuration cannot support the check (e.g. truncation too small).
    ConfigError,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub status: Status,
    pub worst: Option<f64>,
    pub threshold: f64,
    pub location: Option<String>,
    pub detail: String,
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::ConfigError => "ERROR",
        };
        write!(f, "{tag:<5} {:<17}", self.suite.name())?;
        if let Some(w) = self.worst {
            write!(f, " worst {w:.3e} (limit {:.0e})", self.threshold)?;
        }
        if let Some(loc) = &self.location {
            write!(f, " at {loc}")?;
        }
        if !self.detail.is_empty() {
            let sep = if self.worst.is_some() || self.location.is_some() {
                ";"
            } else {
                ""
            };
            write!(f, "{sep} {}", self.detail)?;
        }
        Ok(())
    }
}

/// Running maximum with the place it occurred.
struct Worst {
    value: f64,
    location: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            location: None,
        }
    }

    fn update(&mut self, value: f64, location: impl FnOnce() -> String) {
        if value > self.value || self.location.is_none() {
            self.value = value;
            self.location = Some(location());
        }
    }
}

fn outcome(suite: Suite, worst: Worst, threshold: f64, detail: String) -> SuiteOutcome {
    SuiteOutcome {
        suite,
        status: if worst.value < threshold {
            Status::Pass
        } else {
            Status::Fail
        },
        worst: Some(worst.value),
        threshold,
        location: worst.location,
        detail,
    }
}

fn special(suite: Suite, status: Status, detail: String) -> SuiteOutcome {
    SuiteOutcome {
        suite,
        status,
        worst: None,
        threshold: 0.0,
        location: None,
        detail,
    }
}

fn failed_with(suite: Suite, e: CoreError) -> SuiteOutcome {
    let status = match e {
        CoreError::InvariantViolation(_)
        | CoreError::Singular(_)
        | CoreError::RootFinder { .. } => Status::Fail,
        _ => Status::ConfigError,
    };
    special(suite, status, e.to_string())
}

fn rng_for(seed: u64, suite: Suite) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite as u64);
    rng
}

fn random_disc_point(rng: &mut impl Rng) -> C64 {
    C64::from_polar(
        rng.gen::<f64>().sqrt(),
        rng.gen_range(0.0..std::f64::consts::TAU),
    )
}

/// Unit vector with random complex entries on the given labels.
pub fn random_vector(rng: &mut impl Rng, n: usize, labels: &[usize]) -> CVector {
    let mut f = CVector::zeros(n);
    for &m in labels {
        f[m - 1] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let norm = f.norm();
    if norm > 0.0 {
        f /= C64::new(norm, 0.0);
    }
    f
}

fn fmt_c(z: C64) -> String {
    format!("{:.3}{:+.3}i", z.re, z.im)
}

pub fn run_suites(r: &Resolved, suites: &[Suite]) -> Vec<SuiteOutcome> {
    let list: Vec<Suite> = suites.iter().flat_map(|s| s.expand()).collect();
    list.par_iter().map(|&s| run_suite(r, s)).collect()
}

/// Overall exit status: any failure is an invariant violation, otherwise any
/// unsupported configuration is a config error.
pub fn overall(outcomes: &[SuiteOutcome]) -> ExitStatus {
    if outcomes.iter().any(|o| o.status == Status::Fail) {
        ExitStatus::Invariant
    } else if outcomes.iter().any(|o| o.status == Status::ConfigError) {
        ExitStatus::Config
    } else {
        ExitStatus::Pass
    }
}

fn frame(r: &Resolved) -> Result<FrameSystem, CoreError> {
    build_frame_with_order(&r.blaschke, &r.spec, r.config.series_order)
}

pub fn run_suite(r: &Resolved, suite: Suite) -> SuiteOutcome {
    let result = match suite {
        Suite::ModelIdentity => model_identity(r),
        Suite::MtOrthonormality => mt_orthonormality(r),
        Suite::CoIsometry => co_isometry(r),
        Suite::Parseval => parseval(r),
        Suite::Norms => norms(r),
        Suite::Redundancy => redundancy(r),
        Suite::ContourOracle => contour(r),
        Suite::RieszBounds => riesz(r),
        Suite::DualBasis => dual(r),
        Suite::RightInverse => right_inverse(r),
        Suite::Wandering => Ok(wandering(r)),
        Suite::All => unreachable!("expanded before dispatch"),
    };
    result.unwrap_or_else(|e| failed_with(suite, e))
}

fn series_order(r: &Resolved) -> Result<usize, CoreError> {
    match r.config.series_order {
        Some(k) => Ok(k),
        None => r.blaschke.default_order(),
    }
}

fn model_identity(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let basis = mt_basis(&r.blaschke, series_order(r)?)?;
    let mut rng = rng_for(r.config.seed, Suite::ModelIdentity);
    let mut worst = Worst::new();
    for _ in 0..100 {
        let (z, w) = (random_disc_point(&mut rng), random_disc_point(&mut rng));
        let res = model_identity_residual(&r.blaschke, &basis, z, w)?;
        worst.update(res, || format!("z = {}, w = {}", fmt_c(z), fmt_c(w)));
    }
    Ok(outcome(
        Suite::ModelIdentity,
        worst,
        MODEL_IDENTITY_TOL,
        "100 random pairs".into(),
    ))
}

fn mt_orthonormality(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let k = series_order(r)?;
    let basis = mt_basis(&r.blaschke, k)?;
    let mut worst = Worst::new();
    worst.update(basis.gram_deviation(), || format!("order {k}"));
    Ok(outcome(
        Suite::MtOrthonormality,
        worst,
        MT_GRAM_TOL,
        format!("d = {}", basis.len()),
    ))
}

fn co_isometry(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let v = build_isometry(&r.spec);
    let bv = apply_blaschke_adjoint(&r.blaschke, &v)?;
    let extended = coisometry_defect_extended(&r.blaschke, &bv);
    if matches!(r.spec.kind(), IsometryKind::DiagonalUnitary { .. }) {
        let mut worst = Worst::new();
        let full = coisometry_defect(&bv, &v)?;
        worst.update(full, || "full matrix".into());
        return Ok(outcome(
            Suite::CoIsometry,
            worst,
            UNITARY_COISOMETRY_TOL,
            String::new(),
        ));
    }
    let mut worst = Worst::new();
    let detail = match coisometry_defect(&bv, &v) {
        Ok(d) => {
            let len = v.trusted_interior(bv.depth()).len();
            worst.update(d, || format!("interior of {len} labels"));
            format!("extended defect {extended:.3e}")
        }
        Err(CoreError::DimensionTooSmall { depth, minimal_n }) => format!(
            "interior empty at depth {depth} (needs N >= {minimal_n}); checked with the tail-corrected Gram matrix"
        ),
        Err(e) => return Err(e),
    };
    worst.update(extended, || "all labels, tail-corrected".into());
    Ok(outcome(Suite::CoIsometry, worst, COISOMETRY_TOL, detail))
}

fn parseval(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let sys = frame(r)?;
    let support = sys.tail_safe_support();
    if support.is_empty() {
        let depth = sys.operator_bv.depth();
        return Ok(special(
            Suite::Parseval,
            Status::Skipped,
            format!(
                "tail-safe support is empty at depth {depth} (needs N >= {})",
                r.spec.minimal_dim(depth)
            ),
        ));
    }
    let n = sys.dim();
    let mut rng = rng_for(r.config.seed, Suite::Parseval);
    let (lo, hi) = bessel_bracket(&r.blaschke);
    let mut worst = Worst::new();
    let mut bessel_ok = true;
    let mut tests: Vec<(String, CVector)> = support
        .iter()
        .filter(|&&m| m <= 10)
        .map(|&m| (format!("e_{m}"), linalg::basis_vector(n, m)))
        .collect();
    for k in 0..10 {
        tests.push((format!("random #{k}"), random_vector(&mut rng, n, &support)));
    }
    for (name, f) in &tests {
        let energy = frame_energy(&sys, f);
        let norm2 = f.norm_squared();
        worst.update((energy - norm2).abs(), || name.clone());
        bessel_ok &= energy >= lo * norm2 - PARSEVAL_TOL && energy <= hi * norm2 + PARSEVAL_TOL;
    }
    let mut out = outcome(
        Suite::Parseval,
        worst,
        PARSEVAL_TOL,
        format!(
            "{} vectors, Bessel bracket [{lo:.3e}, {hi:.3e}]",
            tests.len()
        ),
    );
    if !bessel_ok {
        out.status = Status::Fail;
        out.detail.push_str(" violated");
    }
    Ok(out)
}

fn norms(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let sys = frame(r)?;
    let mut worst = Worst::new();
    let mut zeros = 0;
    for m in 1..=sys.dim() {
        let direct = sys.vector(m).norm_squared();
        if direct == 0.0 {
            zeros += 1;
        }
        let formula = norm_formula(&sys, m)?;
        worst.update((formula - direct).abs(), || format!("m = {m}"));
    }
    Ok(outcome(
        Suite::Norms,
        worst,
        NORM_FORMULA_TOL,
        format!("{zeros} exact zero vectors"),
    ))
}

fn redundancy(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let sys = frame(r)?;
    let rep = classify_redundancy(&sys, &r.tolerances)?;
    let borderline = rep.borderline_set();
    let redundant = rep.redundant_set().len();
    let detail = format!(
        "{:?}, {redundant} of {} redundant, {} borderline",
        rep.frame_class,
        sys.dim(),
        borderline.len()
    );
    Ok(SuiteOutcome {
        suite: Suite::Redundancy,
        status: if rep.disagreements.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        worst: None,
        threshold: 0.0,
        location: rep
            .disagreements
            .first()
            .map(|m| format!("verdicts disagree at m = {m}")),
        detail,
    })
}

fn contour(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let v = build_isometry(&r.spec);
    let (radius, nodes) = default_contour(&r.blaschke);
    let quad = riesz_dunford_contour(&r.blaschke, &v, radius, nodes)?;
    let fact = apply_blaschke_adjoint(&r.blaschke, &v)?;
    let diff = &quad.matrix - &fact.matrix;
    let mut worst = Worst::new();
    let (mut at, mut best) = ((0, 0), -1.0);
    for i in 0..diff.nrows() {
        for j in 0..diff.ncols() {
            if diff[(i, j)].norm() > best {
                best = diff[(i, j)].norm();
                at = (i + 1, j + 1);
            }
        }
    }
    worst.update(best, || format!("entry {at:?}"));
    Ok(outcome(
        Suite::ContourOracle,
        worst,
        CONTOUR_TOL,
        format!("N = {}, radius {radius:.4}, {nodes} nodes", v.dim()),
    ))
}

fn riesz(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let v = build_isometry(&r.spec);
    let q = q_from_roots(r.blaschke.roots());
    let check = riesz_basis_vectors_q(&v, &q)?;
    let mut worst = Worst::new();
    for (&m, &x) in check.labels.iter().zip(&check.norms) {
        let excess = (check.lower - x).max(x - check.upper).max(0.0);
        worst.update(excess, || format!("m = {m}"));
    }
    Ok(outcome(
        Suite::RieszBounds,
        worst,
        RIESZ_SLACK,
        format!(
            "{} interior vectors in [{:.4}, {:.4}]",
            check.labels.len(),
            check.lower,
            check.upper
        ),
    ))
}

fn dual(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let v = build_isometry(&r.spec);
    let d = r.blaschke.degree();
    if v.trusted_interior(d).is_empty() {
        return Err(CoreError::DimensionTooSmall {
            depth: d,
            minimal_n: r.spec.minimal_dim(d),
        });
    }
    let q = q_from_roots(r.blaschke.roots());
    let check = dual_riesz_basis_q(&v, &q)?;
    let mut worst = Worst::new();
    worst.update(check.biorthogonality, || "biorthogonality".into());
    worst.update(check.worst_violation, || "norm bracket".into());
    Ok(outcome(
        Suite::DualBasis,
        worst,
        BIORTHOGONALITY_TOL,
        format!("norms in [{:.4}, {:.4}]", check.lower, check.upper),
    ))
}

fn right_inverse(r: &Resolved) -> Result<SuiteOutcome, CoreError> {
    let v = build_isometry(&r.spec);
    let n = v.dim();
    let id = CMatrix::identity(n, n);
    let mut worst = Worst::new();
    let mut lambdas = vec![C64::new(0.0, 0.0)];
    lambdas.extend_from_slice(r.blaschke.roots());
    for lam in lambdas {
        let x = right_inverse_factor(&v, lam)?;
        let a = v.adjoint() + &id * lam;
        worst.update(right_inverse_residual(&a, &x), || {
            format!("factor lambda = {}", fmt_c(lam))
        });
    }
    let bv = apply_blaschke_adjoint(&r.blaschke, &v)?;
    let bd = blaschke_right_inverse(&r.blaschke, &v)?;
    worst.update(right_inverse_residual(&bv.matrix, &bd), || {
        "B(V*) B^dagger(V*)".into()
    });
    Ok(outcome(
        Suite::RightInverse,
        worst,
        RIGHT_INVERSE_TOL,
        String::new(),
    ))
}

fn wandering(r: &Resolved) -> SuiteOutcome {
    let w = wold_decompose(&r.spec);
    let detail = format!(
        "{} wandering vectors, max depth {}",
        w.lambda_indices.len(),
        w.max_depth()
    );
    match verify_wandering(&r.spec, &w) {
        Ok(()) => special(Suite::Wandering, Status::Pass, detail),
        Err(v) => SuiteOutcome {
            location: Some(format!("{v:?}")),
            ..special(Suite::Wandering, Status::Fail, detail)
        },
    }
}
