//! Wandering subspaces `J ⊖ S J_b`, the dimension partition, ordered frame
//! fields, and reconstruction of an invariant range from its wandering part.

use std::collections::BTreeMap;

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::field::{self, FiberVector, FiberedField};
use crate::linalg::{self, RankRule};
use crate::shift::{self, band_rule};
use crate::subspace::{par_fibers, FiberSubspace, RangeFunction};

/// `A_n = { m : rank J_R(λ_m) = n }`. Every grid index is in exactly one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionPartition {
    classes: BTreeMap<usize, Vec<usize>>,
    dims: Vec<usize>,
}

impl DimensionPartition {
    pub fn from_dims(dims: Vec<usize>) -> Self {
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (m, &n) in dims.iter().enumerate() {
            classes.entry(n).or_default().push(m);
        }
        DimensionPartition { classes, dims }
    }

    pub fn classes(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.classes
    }

    /// `n` with `m ∈ A_n`.
    pub fn dim(&self, m: usize) -> usize {
        self.dims[m]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn class(&self, n: usize) -> &[usize] {
        self.classes.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// The ordered frame fields `φ_1 … φ_k` of a wandering range.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFields {
    pub phis: Vec<FiberedField>,
    pub partition: DimensionPartition,
}

/// Wandering part of one band-invariant fiber, or `NotInvariant`.
pub(crate) fn fiber_wandering(q: MatRef<'_, c64>, k: usize, rank_tol: f64, orth_tol: f64, fiber: usize) -> Result<Mat<c64>> {
    let rule = band_rule(rank_tol, orth_tol);
    let (leak, top) = shift::fiber_leak(q, k, &rule, fiber)?;
    if leak > orth_tol {
        return Err(Error::NotInvariant { fiber, leak });
    }
    let (d, r) = (q.nrows(), q.ncols());
    let t = top.ncols();
    if t == 0 || t == r {
        return Ok(linalg::canonical_basis(q));
    }
    // Coordinates (in the frame) of S(J ∩ H_{n_z-1}); its complement in C^r
    // is the wandering part.
    let z = shift::null_from_row_space(top.as_ref());
    let sq = shift::shift_rows(q, k, 1);
    let image = &sq * &z;
    let coords = q.adjoint() * &image;
    let comp = coords.qr().compute_Q();
    let w = q * comp.as_ref().subcols(r - t, t);
    debug_assert_eq!(w.nrows(), d);
    Ok(linalg::canonical_basis(w.as_ref()))
}

/// `λ ↦ J_M(λ) ⊖ S(J_M(λ) ∩ H_{n_z-1})`.
pub fn wandering_range(range: &RangeFunction) -> Result<RangeFunction> {
    let lat = *range.lattice();
    let fibers = par_fibers(lat.n_lambda, |m| {
        let w = fiber_wandering(range.fiber(m).frame(), lat.k, lat.rank_tol, lat.orth_tol, m)?;
        Ok(FiberSubspace::new_unchecked(w))
    })?;
    RangeFunction::from_fibers(lat, fibers)
}

/// Rank classes of a wandering range; ranks above `k` are rejected.
pub fn dimension_partition(wandering: &RangeFunction) -> Result<DimensionPartition> {
    let lat = wandering.lattice();
    let dims = wandering.ranks();
    if let Some((m, &rank)) = dims.iter().enumerate().find(|(_, &r)| r > lat.k) {
        return Err(Error::RankTooLarge { fiber: m, rank, k: lat.k });
    }
    Ok(DimensionPartition::from_dims(dims))
}

/// `φ_i(λ_m)` = `i`-th ordered frame vector of `J_R(λ_m)`, zero past the rank.
pub fn frame_fields(wandering: &RangeFunction) -> Result<FrameFields> {
    let partition = dimension_partition(wandering)?;
    let lat = *wandering.lattice();
    let phis = (0..lat.k)
        .map(|i| {
            FiberedField::from_fn(lat, |m| {
                let f = wandering.fiber(m);
                if i < f.rank() {
                    FiberVector::from_coeffs(lat.n_z, lat.k, f.column(i))
                } else {
                    FiberVector::zeros(lat.n_z, lat.k)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameFields { phis, partition })
}

/// Largest depth accepted by [`reconstruct_from_wandering`]: `n_z - 1` minus
/// the highest effective degree of any wandering frame column.
pub fn max_reconstruction_depth(wandering: &RangeFunction) -> usize {
    let lat = wandering.lattice();
    let top = wandering
        .fibers()
        .iter()
        .flat_map(|f| (0..f.rank()).filter_map(move |c| field::effective_degree(&f.column(c), lat.k, lat.rank_tol)))
        .max()
        .unwrap_or(0);
    lat.n_z - 1 - top
}

/// `λ ↦ ⊕_{j=0}^{depth} S^j J_R(λ)`, with pairwise orthogonality of the
/// summands checked.
pub fn reconstruct_from_wandering(wandering: &RangeFunction, depth: usize) -> Result<RangeFunction> {
    let max_depth = max_reconstruction_depth(wandering);
    if depth > max_depth {
        return Err(Error::BandExceeded { depth, max_depth });
    }
    let lat = *wandering.lattice();
    let fibers = par_fibers(lat.n_lambda, |m| {
        let q = wandering.fiber(m).frame();
        let r = q.ncols();
        let mut stack = Mat::<c64>::zeros(lat.ambient(), r * (depth + 1));
        for j in 0..=depth {
            stack.as_mut().subcols_mut(j * r, r).copy_from(&shift::shift_rows(q, lat.k, j));
        }
        if r > 0 {
            let gram = stack.adjoint() * &stack;
            for a in 0..=depth {
                for b in a + 1..=depth {
                    let block = gram.as_ref().submatrix(a * r, b * r, r, r);
                    let overlap = linalg::max_abs(block);
                    if overlap > lat.orth_tol {
                        return Err(Error::NotOrthogonal { fiber: m, first: a, second: b, overlap });
                    }
                }
            }
        }
        let rule = RankRule { rank_tol: lat.rank_tol, zero_floor: linalg::ZERO_REL, cluster_tol: lat.orth_tol };
        Ok(FiberSubspace::new_unchecked(linalg::column_span(stack.as_ref(), &rule, m)?))
    })?;
    RangeFunction::from_fibers(lat, fibers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eval_field, LaurentPolyField};
    use crate::lattice::TruncationLattice;
    use crate::shift::s_invariant_closure;

    fn one() -> c64 {
        c64::new(1.0, 0.0)
    }

    fn lat() -> TruncationLattice {
        TruncationLattice::new(4, 5, 2).unwrap()
    }

    fn coords(lat: TruncationLattice, axes: &[(usize, usize)]) -> RangeFunction {
        let idx: Vec<usize> = axes.iter().map(|&(j, i)| lat.index(j, i)).collect();
        RangeFunction::constant(lat, &FiberSubspace::coordinates(lat.ambient(), &idx)).unwrap()
    }

    #[test]
    fn wandering_of_full_space_is_the_constants() {
        let l = lat();
        let r = wandering_range(&RangeFunction::full(l)).unwrap();
        assert!(r.distance(&coords(l, &[(0, 0), (0, 1)])).unwrap() < 1e-12);
    }

    #[test]
    fn wandering_of_shifted_coordinate_block() {
        let l = lat();
        let j = coords(l, &[(1, 0), (2, 0), (3, 0), (4, 0)]);
        let r = wandering_range(&j).unwrap();
        assert!(r.distance(&coords(l, &[(1, 0)])).unwrap() < 1e-12);
        assert!(wandering_range(&RangeFunction::zero(l)).unwrap().ranks().iter().all(|&n| n == 0));
    }

    #[test]
    fn wandering_rejects_non_invariant_input() {
        let l = lat();
        assert!(matches!(wandering_range(&coords(l, &[(0, 0)])), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn partitions_and_frames() {
        let l = lat();
        let p = dimension_partition(&coords(l, &[(0, 0)])).unwrap();
        assert_eq!(p.class(1), &[0, 1, 2, 3]);
        let p0 = dimension_partition(&RangeFunction::zero(l)).unwrap();
        assert_eq!(p0.class(0), &[0, 1, 2, 3]);
        assert!(matches!(dimension_partition(&RangeFunction::full(l)), Err(Error::RankTooLarge { .. })));

        let f = frame_fields(&coords(l, &[(0, 0)])).unwrap();
        let e1 = FiberVector::basis(l.n_z, l.k, 0, 0);
        assert!(f.phis[0].fibers().iter().all(|v| *v == e1));
        assert!(f.phis[1].fibers().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn indicator_generator_splits_the_partition() {
        let l = lat();
        // (1 + λ²)/2 is 1 on even and 0 on odd grid points for n_lambda = 4.
        let half = c64::new(0.5, 0.0);
        let g = eval_field(&LaurentPolyField::default().term(0, 0, 0, half).term(2, 0, 0, half), &l).unwrap();
        let r = wandering_range(&s_invariant_closure(&[g], &l).unwrap()).unwrap();
        let f = frame_fields(&r).unwrap();
        assert_eq!(f.partition.class(1), &[0, 2]);
        assert_eq!(f.partition.class(0), &[1, 3]);
        for m in 0..4 {
            assert_eq!(f.phis[0].fiber(m).norm() > 0.5, m % 2 == 0);
        }
    }

    #[test]
    fn reconstruction_cases() {
        let l = lat();
        let r = coords(l, &[(0, 0)]);
        let full = reconstruct_from_wandering(&r, l.n_z - 1).unwrap();
        let block: Vec<(usize, usize)> = (0..l.n_z).map(|j| (j, 0)).collect();
        assert!(full.distance(&coords(l, &block)).unwrap() < 1e-12);
        assert!(reconstruct_from_wandering(&r, 0).unwrap().distance(&r).unwrap() < 1e-12);
        assert!(matches!(reconstruct_from_wandering(&r, l.n_z), Err(Error::BandExceeded { .. })));
    }

    #[test]
    fn wandering_roundtrip_for_polynomial_data() {
        let l = lat();
        let g = eval_field(
            &LaurentPolyField::default().term(0, 0, 0, c64::new(-0.3, 0.0)).term(1, 1, 0, one()).term(0, 1, 1, one()),
            &l,
        )
        .unwrap();
        let jm = s_invariant_closure(&[g], &l).unwrap();
        let r = wandering_range(&jm).unwrap();
        let depth = max_reconstruction_depth(&r);
        let back = reconstruct_from_wandering(&r, depth).unwrap();
        let again = wandering_range(&back).unwrap();
        assert!(again.distance(&r).unwrap() < 1e-7);
    }
}
