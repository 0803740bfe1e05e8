//! Full-Hardy range functions `λ ↦ H²_{J(λ)}` over a base `J` in `K`.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::field::FiberVector;
use crate::linalg;
use crate::shift::{self, band_rule};
use crate::subspace::{par_fibers, BaseRange, FiberSubspace, RangeFunction};
use crate::wandering::fiber_wandering;

/// `(P_{H²_{K₁}} v)(z) = P_{K₁} v(z)`: each degree block projected onto `K₁`.
pub fn project_pointwise(v: &FiberVector, base: &FiberSubspace) -> Result<FiberVector> {
    let k = v.k();
    if base.ambient() != k {
        return Err(Error::LatticeMismatch(format!("base ambient {} vs k = {k}", base.ambient())));
    }
    let mut out = FiberVector::zeros(v.n_z(), k);
    for j in 0..v.n_z() {
        let block = &v.coeffs()[j * k..(j + 1) * k];
        out.coeffs_mut()[j * k..(j + 1) * k].copy_from_slice(&base.project(block));
    }
    Ok(out)
}

/// Frame `{S^j u : u ∈ base frame, 0 ≤ j < n_z}`, ordered by degree first.
pub(crate) fn lift_frame(base: MatRef<'_, c64>, n_z: usize) -> Mat<c64> {
    let (k, n) = (base.nrows(), base.ncols());
    let mut out = Mat::<c64>::zeros(n_z * k, n_z * n);
    for j in 0..n_z {
        out.as_mut().submatrix_mut(j * k, j * n, k, n).copy_from(base);
    }
    out
}

/// `λ ↦ H²_{J(λ)}`.
pub fn full_hardy_from_base(base: &BaseRange) -> Result<RangeFunction> {
    let lat = *base.lattice();
    let fibers = base
        .fibers()
        .iter()
        .map(|f| FiberSubspace::new_unchecked(lift_frame(f.frame(), lat.n_z)))
        .collect();
    RangeFunction::from_fibers(lat, fibers)
}

/// Full-Hardy test for one fiber frame in `C^(n_z k)`: `None` when the fiber
/// or its complement is not band-invariant, otherwise the recovered base.
pub(crate) fn fiber_full_hardy(
    q: MatRef<'_, c64>,
    k: usize,
    rank_tol: f64,
    orth_tol: f64,
    fiber: usize,
) -> Result<Option<Mat<c64>>> {
    let rule = band_rule(rank_tol, orth_tol);
    let (leak, _) = shift::fiber_leak(q, k, &rule, fiber)?;
    if leak > orth_tol {
        return Ok(None);
    }
    let (d, r) = (q.nrows(), q.ncols());
    let comp = if r == 0 {
        Mat::identity(d, d)
    } else if r >= d {
        linalg::empty(d)
    } else {
        q.qr().compute_Q().as_ref().subcols(r, d - r).to_owned()
    };
    let (co_leak, _) = shift::fiber_leak(comp.as_ref(), k, &rule, fiber)?;
    if co_leak > orth_tol {
        return Ok(None);
    }
    let w = fiber_wandering(q, k, rank_tol, orth_tol, fiber)?;
    let residual = linalg::fro(w.as_ref().subrows(k, d - k));
    if residual > orth_tol {
        return Err(Error::BaseNotConstant { fiber, residual });
    }
    Ok(Some(linalg::reorthonormalize(w.as_ref().subrows(0, k))))
}

/// Returns the base `J` when every fiber is `H²_{J(λ)}` (both the fiber and
/// its complement band-invariant, wandering part constant in z).
pub fn is_full_hardy(range: &RangeFunction) -> Result<Option<BaseRange>> {
    let lat = *range.lattice();
    let found = par_fibers(lat.n_lambda, |m| fiber_full_hardy(range.fiber(m).frame(), lat.k, lat.rank_tol, lat.orth_tol, m))?;
    let Some(frames) = found.into_iter().collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let fibers = frames.into_iter().map(FiberSubspace::new_unchecked).collect();
    Ok(Some(BaseRange::from_fibers(lat, fibers)?))
}

/// `λ ↦ J(λ)^⊥` in `K`; its full-Hardy space is the complement of `H²_J`.
pub fn full_hardy_complement(base: &BaseRange) -> Result<BaseRange> {
    let fibers = base.fibers().iter().map(FiberSubspace::complement).collect();
    BaseRange::from_fibers(*base.lattice(), fibers)
}
