//! Small dense helpers over `nalgebra` complex matrices.

use alloc::vec::Vec;

use matrixmultiply::CGemmOption;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense product `a * b` through the blocked complex GEMM kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex<f64> is repr(C) with layout [re, im]; all three
    // matrices are contiguous column-major with the strides given.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr().cast(),
            1,
            m as isize,
            b.as_ptr().cast(),
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr().cast(),
            1,
            m as isize,
        );
    }
    c
}

/// `a * a^H`.
pub fn gram(a: &CMatrix) -> CMatrix {
    matmul(a, &a.adjoint())
}

/// Solves `a * x = b` by partial-pivot LU.
pub fn solve(a: &CMatrix, b: &CMatrix, what: &'static str) -> Result<CMatrix> {
    a.clone().lu().solve(b).ok_or(Error::Singular(what))
}

pub fn inverse(a: &CMatrix, what: &'static str) -> Result<CMatrix> {
    let n = a.nrows();
    solve(a, &CMatrix::identity(n, n), what)
}

/// Largest singular value. Zero for an empty matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| if s > acc { s } else { acc })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sym = m.clone();
    // symmetrize away rounding so the solver sees an exactly Hermitian input
    let h = (&sym + sym.adjoint()) * C64::new(0.5, 0.0);
    sym.copy_from(&h);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Principal submatrix on the given 1-based labels.
pub fn principal_submatrix(m: &CMatrix, labels: &[usize]) -> CMatrix {
    CMatrix::from_fn(labels.len(), labels.len(), |i, j| {
        m[(labels[i] - 1, labels[j] - 1)]
    })
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn basis_vector(n: usize, label: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[label - 1] = ONE;
    v
}

/// Orthogonal projection residual of `f` against the column span of `a`.
///
/// Uses the thin SVD; singular values below `rank_tol * sigma_max` are
/// treated as zero.
pub fn span_residual(a: &CMatrix, f: &CVector, rank_tol: f64) -> CVector {
    if a.ncols() == 0 {
        return f.clone();
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let mut r = f.clone();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > rank_tol * smax {
            let col = u.column(k);
            let c = col.dotc(f);
            r -= col * c;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_matches_naive_product() {
        let a = CMatrix::from_fn(5, 3, |i, j| {
            C64::new(i as f64 - 0.5 * j as f64, (i * j) as f64 + 0.25)
        });
        let b = CMatrix::from_fn(3, 4, |i, j| C64::new((i + 2 * j) as f64, 1.0 - i as f64));
        assert!(max_abs_entry(&(matmul(&a, &b) - &a * &b)) < 1e-13);
        assert!(max_abs_entry(&(gram(&a) - &a * a.adjoint())) < 1e-13);
        assert_eq!(
            matmul(&CMatrix::zeros(2, 0), &CMatrix::zeros(0, 3)),
            CMatrix::zeros(2, 3)
        );
    }
}
