//! Blaschke products, the functional calculus `B(V*)` of truncated
//! isometries, and the frames `b_m = B(V*) e_m` together with their
//! redundancy classification.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod blaschke;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod operators;
pub mod series;
pub mod wold;

pub use blaschke::{mt_basis, BlaschkeProduct, MtBasis};
pub use error::{Error, Result};
pub use frames::{
    build_frame, classify_redundancy, reconstruct, FrameReport, FrameSystem, Tolerances,
};
pub use linalg::{CMatrix, CVector, C64};
pub use operators::{build_isometry, IsometryKind, IsometrySpec, ShiftKind, TruncatedOperator};
pub use series::{Polynomial, PowerSeries};
pub use wold::{wold_decompose, Part, WoldData};
