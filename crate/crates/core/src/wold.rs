//! Wold decomposition `H = H_u (+) H_s` of a truncated isometry.
//!
//! The shift part is the orthogonal sum of the orbits `{V^k e_n}` of the
//! wandering vectors `e_n`, `n` in `Lambda`, the labels spanning `Ker V*`.
//! A shift-part label `m` sits at depth `s(m)` on the orbit of generator
//! `n`, meaning `e_m = V^{s(m)-1} e_n` up to phase.

use alloc::vec::Vec;

use crate::linalg::{self, CMatrix, CVector};
use crate::operators::{build_isometry, IsometrySpec};

/// Orthogonality tolerance for distinct orbit vectors.
pub const WANDERING_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    Unitary,
    Shift,
}

/// Per-label Wold data; all labels 1-based, vectors indexed by `m - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WoldData {
    pub part: Vec<Part>,
    /// Labels of the wandering vectors, ascending.
    pub lambda_indices: Vec<usize>,
    pub depth: Vec<Option<usize>>,
    /// 1-based position in `lambda_indices` of the orbit each label is on.
    pub generator: Vec<Option<usize>>,
}

impl WoldData {
    pub fn dim(&self) -> usize {
        self.part.len()
    }

    pub fn part_of(&self, m: usize) -> Part {
        self.part[m - 1]
    }

    pub fn depth_of(&self, m: usize) -> Option<usize> {
        self.depth[m - 1]
    }

    pub fn generator_of(&self, m: usize) -> Option<usize> {
        self.generator[m - 1]
    }

    /// Largest `s(m)` over the truncation, 0 when there is no shift part.
    pub fn max_depth(&self) -> usize {
        self.depth.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Labels of the orbit of the `n`-th wandering vector inside the
    /// truncation, by increasing depth.
    pub fn orbit(&self, n: usize) -> Vec<usize> {
        let mut out: Vec<(usize, usize)> = (1..=self.dim())
            .filter(|&m| self.generator_of(m) == Some(n))
            .map(|m| (self.depth_of(m).unwrap_or(0), m))
            .collect();
        out.sort_unstable();
        out.into_iter().map(|(_, m)| m).collect()
    }
}

/// Walks each label down by `V*` to the kernel.
pub fn wold_decompose(spec: &IsometrySpec) -> WoldData {
    let n = spec.dim();
    let u = spec.unitary_dim();
    let mut part = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    let mut root = Vec::with_capacity(n);
    for m in 1..=n {
        if m <= u {
            part.push(Part::Unitary);
            depth.push(None);
            root.push(None);
            continue;
        }
        let mut label = m;
        let mut s = 1;
        while let Some((prev, _)) = spec.preimage(label) {
            label = prev;
            s += 1;
        }
        part.push(Part::Shift);
        depth.push(Some(s));
        root.push(Some(label));
    }
    let lambda_indices: Vec<usize> = (1..=n).filter(|&m| depth[m - 1] == Some(1)).collect();
    let generator = root
        .iter()
        .map(|r| {
            r.map(|g| {
                lambda_indices
                    .binary_search(&g)
                    .expect("generator is a kernel label")
                    + 1
            })
        })
        .collect();
    WoldData {
        part,
        lambda_indices,
        depth,
        generator,
    }
}

/// First failure found by [`verify_wandering`].
#[derive(Clone, Debug, PartialEq)]
pub enum WanderingViolation {
    /// `|<V^a e_g, V^b e_h>|` exceeds the tolerance for a distinct pair;
    /// orbit positions are `(generator, power)`.
    NotOrthogonal {
        first: (usize, usize),
        second: (usize, usize),
        inner: f64,
    },
    /// An orbit vector fails to have unit norm.
    NotUnit { at: (usize, usize), norm: f64 },
    /// A claimed wandering label is not in `Ker V*`.
    NotInKernel { label: usize },
    /// `(V*)^{s-1} e_m` is not the generator, or `(V*)^s e_m` is not zero.
    DepthMismatch { label: usize },
    /// A shift-part label is missed by every orbit, or a unitary label is hit.
    Coverage { label: usize },
}

/// Checks the wandering-subspace structure independently of
/// [`wold_decompose`]: orbit vectors are built from the dense matrix of `V`
/// and compared with the recorded depths.
pub fn verify_wandering(spec: &IsometrySpec, data: &WoldData) -> Result<(), WanderingViolation> {
    let v = build_isometry(spec);
    let n = spec.dim();
    let vstar = v.adjoint();

    for &g in &data.lambda_indices {
        if vstar.column(g - 1).norm() > WANDERING_TOL {
            return Err(WanderingViolation::NotInKernel { label: g });
        }
    }

    // orbit vectors V^k e_g while they stay inside the truncation
    let mut positions = Vec::new();
    let mut columns: Vec<CVector> = Vec::new();
    for (idx, &g) in data.lambda_indices.iter().enumerate() {
        let mut x = linalg::basis_vector(n, g);
        let mut k = 0;
        loop {
            positions.push((idx + 1, k));
            columns.push(x.clone());
            if !spec.trusted_interior(k + 1).contains(&g) {
                break;
            }
            x = &v.matrix * x;
            k += 1;
        }
    }
    let w = if columns.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&columns)
    };
    let gram = w.adjoint() * &w;
    for a in 0..columns.len() {
        let norm = libm::sqrt(gram[(a, a)].re);
        if (norm - 1.0).abs() > WANDERING_TOL {
            return Err(WanderingViolation::NotUnit {
                at: positions[a],
                norm,
            });
        }
        for b in a + 1..columns.len() {
            let inner = gram[(a, b)].norm();
            if inner > WANDERING_TOL {
                return Err(WanderingViolation::NotOrthogonal {
                    first: positions[a],
                    second: positions[b],
                    inner,
                });
            }
        }
    }

    let mut covered = alloc::vec![false; n];
    for x in &columns {
        for (i, z) in x.iter().enumerate() {
            if z.norm() > 0.5 {
                covered[i] = true;
            }
        }
    }
    for m in 1..=n {
        let want = data.part_of(m) == Part::Shift;
        if covered[m - 1] != want {
            return Err(WanderingViolation::Coverage { label: m });
        }
    }

    for m in 1..=n {
        let (Some(s), Some(gen)) = (data.depth_of(m), data.generator_of(m)) else {
            continue;
        };
        let g = data.lambda_indices[gen - 1];
        let mut x = linalg::basis_vector(n, m);
        for _ in 1..s {
            x = &vstar * x;
        }
        let hits_generator = (x[g - 1].norm() - 1.0).abs() < WANDERING_TOL
            && (x.norm_squared() - 1.0).abs() < WANDERING_TOL;
        let dies = (&vstar * x).norm() < WANDERING_TOL;
        if !hits_generator || !dies {
            return Err(WanderingViolation::DepthMismatch { label: m });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ShiftKind;
    use alloc::vec;

    #[test]
    fn right_shift_has_one_orbit() {
        let spec = IsometrySpec::right_shift(16).unwrap();
        let w = wold_decompose(&spec);
        assert_eq!(w.lambda_indices, vec![1]);
        for m in 1..=16 {
            assert_eq!(w.depth_of(m), Some(m));
            assert_eq!(w.generator_of(m), Some(1));
        }
        assert_eq!(verify_wandering(&spec, &w), Ok(()));
    }

    #[test]
    fn mult_shift_p2_n16() {
        let spec = IsometrySpec::mult_shift(2, 16).unwrap();
        let w = wold_decompose(&spec);
        assert_eq!(w.lambda_indices, vec![1, 3, 5, 7, 9, 11, 13, 15]);
        assert_eq!(w.depth_of(12), Some(3));
        assert_eq!(w.lambda_indices[w.generator_of(12).unwrap() - 1], 3);
        assert_eq!(w.depth_of(16), Some(5));
        assert_eq!(w.orbit(1), vec![1, 2, 4, 8, 16]);
        assert_eq!(verify_wandering(&spec, &w), Ok(()));
    }

    #[test]
    fn mult_shift_closed_form() {
        let p = 3;
        let spec = IsometrySpec::mult_shift(p, 200).unwrap();
        let w = wold_decompose(&spec);
        for m in 1..=200 {
            let mut n = m;
            let mut s = 1;
            while n % p == 0 {
                n /= p;
                s += 1;
            }
            assert_eq!(w.depth_of(m), Some(s));
            assert_eq!(w.lambda_indices[w.generator_of(m).unwrap() - 1], n);
        }
    }

    #[test]
    fn diagonal_unitary_is_all_unitary() {
        let spec = IsometrySpec::diagonal_unitary(vec![0.1; 8]).unwrap();
        let w = wold_decompose(&spec);
        assert!(w.lambda_indices.is_empty());
        assert!(w.part.iter().all(|&p| p == Part::Unitary));
        assert_eq!(w.max_depth(), 0);
        assert_eq!(verify_wandering(&spec, &w), Ok(()));
    }

    #[test]
    fn wold_sum_offsets_shift_block() {
        let spec = IsometrySpec::wold_sum(vec![0.0, 1.0, 2.0], ShiftKind::Mult(2), 19).unwrap();
        let w = wold_decompose(&spec);
        assert_eq!(w.part_of(3), Part::Unitary);
        assert_eq!(w.part_of(4), Part::Shift);
        assert_eq!(w.lambda_indices, vec![4, 6, 8, 10, 12, 14, 16, 18]);
        assert_eq!(w.depth_of(11), Some(4));
        assert_eq!(w.depth_of(15), Some(3));
        assert_eq!(verify_wandering(&spec, &w), Ok(()));
    }

    #[test]
    fn corrupted_depth_is_reported() {
        let spec = IsometrySpec::mult_shift(2, 16).unwrap();
        let mut w = wold_decompose(&spec);
        w.depth[11] = Some(2);
        assert_eq!(
            verify_wandering(&spec, &w),
            Err(WanderingViolation::DepthMismatch { label: 12 })
        );
    }

    #[test]
    fn bogus_generator_is_reported() {
        let spec = IsometrySpec::right_shift(8).unwrap();
        let mut w = wold_decompose(&spec);
        w.lambda_indices.push(2);
        assert_eq!(
            verify_wandering(&spec, &w),
            Err(WanderingViolation::NotInKernel { label: 2 })
        );
    }
}
