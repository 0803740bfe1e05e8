//! Range functions from generators, membership, complements and direct sums.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::field::FiberedField;
use crate::lattice::TruncationLattice;
use crate::linalg::{self, RankRule};
use crate::subspace::{par_fibers, FiberSubspace, RangeFunction};

/// Column spans of one spanning matrix per fiber, ranked relative to each
/// fiber's largest singular value with a machine-zero floor taken from the
/// largest fiber norm.
pub(crate) fn range_of_stacks(lat: &TruncationLattice, stacks: &[Mat<c64>]) -> Result<RangeFunction> {
    let scale = stacks.iter().map(|s| linalg::fro(s.as_ref())).fold(0.0, f64::max);
    let rule = RankRule { rank_tol: lat.rank_tol, zero_floor: linalg::ZERO_REL * scale, cluster_tol: lat.orth_tol };
    let fibers = par_fibers(stacks.len(), |m| {
        Ok(FiberSubspace::new_unchecked(linalg::column_span(stacks[m].as_ref(), &rule, m)?))
    })?;
    RangeFunction::from_fibers(*lat, fibers)
}

/// Per fiber, the span of the generator values `g(λ_m)`.
pub fn range_from_generators(gens: &[FiberedField], lat: &TruncationLattice) -> Result<RangeFunction> {
    if gens.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    for g in gens {
        lat.check_shape(g.lattice())?;
    }
    let d = lat.ambient();
    let stacks: Vec<Mat<c64>> = (0..lat.n_lambda)
        .map(|m| Mat::from_fn(d, gens.len(), |r, c| gens[c].fiber(m).coeffs()[r]))
        .collect();
    range_of_stacks(lat, &stacks)
}

/// Fiberwise membership test: returns whether `f(λ_m) ∈ J(λ_m)` for every
/// `m` (relative to `orth_tol · max(1, ‖f‖)`) and the largest residual.
pub fn member(f: &FiberedField, range: &RangeFunction) -> Result<(bool, f64)> {
    range.lattice().check_shape(f.lattice())?;
    let residuals: Vec<f64> = f
        .fibers()
        .iter()
        .zip(range.fibers())
        .map(|(v, j)| j.residual_norm(v.coeffs()))
        .collect();
    let worst = residuals.into_iter().fold(0.0, f64::max);
    let ok = worst <= range.lattice().orth_tol * f.norm().max(1.0);
    Ok((ok, worst))
}

/// `λ ↦ J(λ)^⊥`.
pub fn complement_range(range: &RangeFunction) -> Result<RangeFunction> {
    let fibers = par_fibers(range.fibers().len(), |m| Ok(range.fiber(m).complement()))?;
    RangeFunction::from_fibers(*range.lattice(), fibers)
}

/// `λ ↦ ⊕_n J_n(λ)` for fiberwise orthogonal summands.
pub fn direct_sum_ranges(ranges: &[RangeFunction]) -> Result<RangeFunction> {
    let first = ranges.first().ok_or(Error::EmptyGenerators)?;
    let lat = *first.lattice();
    for r in ranges {
        lat.check_shape(r.lattice())?;
    }
    let fibers = par_fibers(lat.n_lambda, |m| {
        for a in 0..ranges.len() {
            for b in a + 1..ranges.len() {
                let (qa, qb) = (ranges[a].fiber(m).frame(), ranges[b].fiber(m).frame());
                if qa.ncols() == 0 || qb.ncols() == 0 {
                    continue;
                }
                let overlap = linalg::max_abs((qa.adjoint() * qb).as_ref());
                if overlap > lat.orth_tol {
                    return Err(Error::NotOrthogonal { fiber: m, first: a, second: b, overlap });
                }
            }
        }
        let total: usize = ranges.iter().map(|r| r.fiber(m).rank()).sum();
        let mut stacked = Mat::<c64>::zeros(lat.ambient(), total);
        let mut col = 0;
        for r in ranges {
            let q = r.fiber(m).frame();
            for c in 0..q.ncols() {
                for row in 0..q.nrows() {
                    stacked[(row, col)] = q[(row, c)];
                }
                col += 1;
            }
        }
        Ok(FiberSubspace::new_unchecked(linalg::reorthonormalize(stacked.as_ref())))
    })?;
    RangeFunction::from_fibers(lat, fibers)
}

/// Grid indices where the range function is nonzero.
pub fn spectrum(range: &RangeFunction) -> Vec<usize> {
    range.fibers().iter().enumerate().filter(|(_, f)| f.rank() > 0).map(|(m, _)| m).collect()
}

/// `max_m ‖(P_A - P_B) P_{H_L}‖` with `L = bands[m]`: the two projectors
/// compared on inputs of z-degree below the band. Truncation edits the top
/// degrees of both ranges differently, so only this restriction is
/// meaningful when they come from different constructions.
pub fn band_distance(a: &RangeFunction, b: &RangeFunction, bands: &[usize]) -> Result<f64> {
    let lat = *a.lattice();
    lat.check_shape(b.lattice())?;
    if bands.len() != lat.n_lambda {
        return Err(Error::LatticeMismatch(format!("{} bands for {} fibers", bands.len(), lat.n_lambda)));
    }
    let d = par_fibers(lat.n_lambda, |m| {
        let cols = bands[m].min(lat.n_z) * lat.k;
        let (qa, qb) = (a.fiber(m).frame(), b.fiber(m).frame());
        let diff = qa * qa.subrows(0, cols).adjoint() - qb * qb.subrows(0, cols).adjoint();
        linalg::op_norm(diff.as_ref())
    })?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eval_field, FiberVector, LaurentPolyField};

    fn one() -> c64 {
        c64::new(1.0, 0.0)
    }

    fn lat() -> TruncationLattice {
        TruncationLattice::new(6, 3, 2).unwrap()
    }

    fn e(j: usize, i: usize) -> FiberedField {
        let l = lat();
        FiberedField::constant(l, &FiberVector::basis(l.n_z, l.k, j, i))
    }

    #[test]
    fn band_distance_ignores_degrees_above_the_band() {
        let l = lat();
        let low = range_from_generators(&[e(0, 0)], &l).unwrap();
        let both = range_from_generators(&[e(0, 0), e(2, 0)], &l).unwrap();
        assert!(band_distance(&low, &both, &[2; 6]).unwrap() < 1e-15);
        assert!((band_distance(&low, &both, &[3; 6]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_generator_gives_rank_one() {
        let j = range_from_generators(&[e(0, 0)], &lat()).unwrap();
        assert!(j.ranks().iter().all(|&r| r == 1));
        assert_eq!(spectrum(&j), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn colinear_fibers_stay_rank_one() {
        let l = lat();
        let g = eval_field(&LaurentPolyField::default().term(1, 0, 0, one()), &l).unwrap();
        let j = range_from_generators(&[e(0, 0), g], &l).unwrap();
        assert!(j.ranks().iter().all(|&r| r == 1));
    }

    #[test]
    fn orthonormal_pair_gives_rank_two() {
        let j = range_from_generators(&[e(0, 0), e(0, 1)], &lat()).unwrap();
        assert!(j.ranks().iter().all(|&r| r == 2));
    }

    #[test]
    fn empty_generators_rejected() {
        assert!(matches!(range_from_generators(&[], &lat()), Err(Error::EmptyGenerators)));
    }

    #[test]
    fn membership_cases() {
        let l = lat();
        let j = range_from_generators(&[e(0, 0)], &l).unwrap();
        assert_eq!(member(&FiberedField::zeros(l), &j).unwrap(), (true, 0.0));
        let (ok, res) = member(&e(0, 1), &j).unwrap();
        assert!(!ok);
        assert!((res - 1.0).abs() < 1e-15);
        let (ok, res) = member(&e(0, 0), &j).unwrap();
        assert!(ok && res <= l.orth_tol);
    }

    #[test]
    fn complement_cases() {
        let l = lat();
        let zero = RangeFunction::zero(l);
        assert!(complement_range(&zero).unwrap().ranks().iter().all(|&r| r == l.ambient()));
        let j = range_from_generators(&[e(0, 0)], &l).unwrap();
        let c = complement_range(&j).unwrap();
        for (jj, ii) in [(0, 1), (1, 0), (1, 1), (2, 0), (2, 1)] {
            assert!(member(&e(jj, ii), &c).unwrap().0);
        }
        let back = complement_range(&c).unwrap();
        assert!(back.distance(&j).unwrap() <= l.orth_tol);
    }

    #[test]
    fn direct_sum_cases() {
        let l = lat();
        let a = range_from_generators(&[e(0, 0)], &l).unwrap();
        let b = range_from_generators(&[e(0, 1)], &l).unwrap();
        let ab = direct_sum_ranges(&[a.clone(), b]).unwrap();
        let both = range_from_generators(&[e(0, 0), e(0, 1)], &l).unwrap();
        assert!(ab.distance(&both).unwrap() <= l.orth_tol);
        let full = direct_sum_ranges(&[a.clone(), complement_range(&a).unwrap()]).unwrap();
        assert!(full.ranks().iter().all(|&r| r == l.ambient()));
        assert!(matches!(direct_sum_ranges(&[a.clone(), a]), Err(Error::NotOrthogonal { .. })));
    }
}
