use alloc::string::String;
use alloc::vec::Vec;

use crate::C64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("root {index} has modulus {modulus}, must lie strictly inside the unit disc")]
    RootOutsideDisc { index: usize, modulus: f64 },

    #[error("constant term is zero, series has no reciprocal")]
    ZeroConstantTerm,

    #[error("companion-matrix root finder did not converge (residuals: {residuals:?})")]
    RootFinder { residuals: Vec<f64> },

    #[error("unimodular constant has modulus {modulus}, expected 1")]
    NonUnimodularTau { modulus: f64 },

    #[error("point {z} lies within {distance:e} of the pole {pole}")]
    PoleProximity { z: C64, pole: C64, distance: f64 },

    #[error("requested coefficient order {requested} exceeds series order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("series order {order} is below the minimum {minimum}")]
    OrderTooSmall { order: usize, minimum: usize },

    #[error(
        "largest root modulus {ratio} exceeds 0.99; series converge too slowly (override required)"
    )]
    DecayTooSlow { ratio: f64 },

    #[error("invalid isometry spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "truncation too small: trusted interior for depth {depth} is empty, need N >= {minimal_n}"
    )]
    DimensionTooSmall { depth: usize, minimal_n: usize },

    #[error("linear system is singular on the truncation ({0}); enlarge N")]
    Singular(&'static str),

    #[error("contour radius {radius} outside the admissible range ({min}, {max})")]
    ContourRadius { radius: f64, min: f64, max: f64 },

    #[error("coefficients {0:?} are not in the symmetrized polydisc")]
    NotInSymmetrizedPolydisc(Vec<C64>),

    #[error("vector has weight on index {index}, outside the tail-safe support (largest safe index: {bound}, 0 if none)")]
    Support { index: usize, bound: usize },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}
