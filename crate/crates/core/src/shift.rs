//! The bilateral shift `U`, the truncated unilateral shift `S`, its fiberwise
//! lift `Ŝ`, and the invariance and commutation checks built on them.
//!
//! The truncated `S` drops the top z-degree. It is an exact isometry on the
//! band of vectors whose top block vanishes, and all invariance statements
//! are made relative to that band: a fiber `J` is band-invariant when
//! `S(J ∩ H_{n_z-1}) ⊆ J`.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::field::{FiberVector, FiberedField};
use crate::lattice::TruncationLattice;
use crate::linalg::{self, RankRule};
use crate::opfield::OperatorField;
use crate::subspace::{par_fibers, FiberSubspace, RangeFunction};

/// `(Uf)(λ) = λ f(λ)`.
pub fn apply_u(f: &FiberedField) -> FiberedField {
    let lat = *f.lattice();
    f.map(|m, v| v.scaled(lat.lambda(m)))
}

/// `(U*f)(λ) = conj(λ) f(λ)`.
pub fn apply_u_star(f: &FiberedField) -> FiberedField {
    let lat = *f.lattice();
    f.map(|m, v| v.scaled(lat.lambda_pow(m, -1)))
}

/// Truncated `S`: moves degree `j` to `j + 1` and drops degree `n_z - 1`.
pub fn shift_fiber(v: &FiberVector) -> FiberVector {
    let (n, k) = (v.n_z(), v.k());
    let mut out = FiberVector::zeros(n, k);
    out.coeffs_mut()[k..].copy_from_slice(&v.coeffs()[..(n - 1) * k]);
    out
}

/// Backward shift `S*`: moves degree `j + 1` to `j`, top degree becomes 0.
pub fn shift_star_fiber(v: &FiberVector) -> FiberVector {
    let (n, k) = (v.n_z(), v.k());
    let mut out = FiberVector::zeros(n, k);
    out.coeffs_mut()[..(n - 1) * k].copy_from_slice(&v.coeffs()[k..]);
    out
}

/// `(Ŝf)(λ) = S f(λ)`.
pub fn apply_s_hat(f: &FiberedField) -> FiberedField {
    f.map(|_, v| shift_fiber(v))
}

/// Truncated `S^j` applied to every column of a fiber matrix.
pub(crate) fn shift_rows(q: MatRef<'_, c64>, k: usize, j: usize) -> Mat<c64> {
    let d = q.nrows();
    let s = j * k;
    Mat::from_fn(d, q.ncols(), |r, c| if r >= s { q[(r - s, c)] } else { c64::new(0.0, 0.0) })
}

/// Rank rule for rows of an orthonormal frame: scale is 1, so singular
/// values at or below `rank_tol` are treated as zero outright.
pub(crate) fn band_rule(rank_tol: f64, orth_tol: f64) -> RankRule {
    RankRule { rank_tol, zero_floor: rank_tol, cluster_tol: orth_tol }
}

/// Orthonormal basis (columns) of the row space of `a`.
pub(crate) fn row_space(a: MatRef<'_, c64>, rule: &RankRule, fiber: usize) -> Result<Mat<c64>> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows == 0 || cols == 0 {
        return Ok(linalg::empty(cols));
    }
    let svd = a.thin_svd().map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let sigma: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    let rank = rule.rank(&sigma, fiber)?;
    Ok(svd.V().subcols(0, rank).to_owned())
}

/// Orthonormal basis of the complement of the orthonormal columns `v`.
pub(crate) fn null_from_row_space(v: MatRef<'_, c64>) -> Mat<c64> {
    let (r, t) = (v.nrows(), v.ncols());
    if t == 0 {
        return Mat::identity(r, r);
    }
    if t >= r {
        return linalg::empty(r);
    }
    v.qr().compute_Q().as_ref().subcols(t, r - t).to_owned()
}

/// `X (I - V Vᴴ)` for orthonormal `v`.
pub(crate) fn deflate_cols(x: MatRef<'_, c64>, v: MatRef<'_, c64>) -> Mat<c64> {
    if v.ncols() == 0 {
        return x.to_owned();
    }
    let xv = x * v;
    x - &xv * v.adjoint()
}

/// Row space of the frame rows at degrees `≥ from` (as coefficient vectors).
pub(crate) fn rows_above(q: MatRef<'_, c64>, k: usize, from: usize, rule: &RankRule, fiber: usize) -> Result<Mat<c64>> {
    let start = from * k;
    row_space(q.subrows(start, q.nrows() - start), rule, fiber)
}

/// Band-invariance leak of one fiber: `‖(I - P_J) S P_{J_b}‖_F` together with
/// the row space of the frame's top block.
pub(crate) fn fiber_leak(q: MatRef<'_, c64>, k: usize, rule: &RankRule, fiber: usize) -> Result<(f64, Mat<c64>)> {
    let n_z = q.nrows() / k;
    if q.ncols() == 0 || n_z < 2 {
        return Ok((0.0, linalg::empty(q.ncols())));
    }
    let top = rows_above(q, k, n_z - 1, rule, fiber)?;
    let band = deflate_cols(q, top.as_ref());
    let shifted = shift_rows(band.as_ref(), k, 1);
    Ok((linalg::leak_fro(q, shifted.as_ref()), top))
}

/// Smallest band-invariant subspace containing the orthonormal columns `q`.
pub(crate) fn fiber_hull(q: Mat<c64>, k: usize, lat: &TruncationLattice, fiber: usize) -> Result<Mat<c64>> {
    let brule = band_rule(lat.rank_tol, lat.orth_tol);
    let rule = RankRule { rank_tol: lat.rank_tol, zero_floor: linalg::ZERO_REL, cluster_tol: lat.orth_tol };
    let n_z = q.nrows() / k;
    let mut q = q;
    for _ in 0..=n_z {
        let (leak, top) = fiber_leak(q.as_ref(), k, &brule, fiber)?;
        if leak <= lat.orth_tol {
            return Ok(q);
        }
        let band = deflate_cols(q.as_ref(), top.as_ref());
        let shifted = shift_rows(band.as_ref(), k, 1);
        let mut both = Mat::<c64>::zeros(q.nrows(), q.ncols() + shifted.ncols());
        both.as_mut().subcols_mut(0, q.ncols()).copy_from(&q);
        both.as_mut().subcols_mut(q.ncols(), shifted.ncols()).copy_from(&shifted);
        q = linalg::column_span(both.as_ref(), &rule, fiber)?;
    }
    let (leak, _) = fiber_leak(q.as_ref(), k, &brule, fiber)?;
    Err(Error::NotInvariant { fiber, leak })
}

/// Band-invariance of every fiber: `(max leak ≤ orth_tol, max leak)`. The
/// leak is the Frobenius norm of `(I - P_J) S` on `J ∩ H_{n_z-1}`, an upper
/// bound on the operator norm.
pub fn is_s_invariant(range: &RangeFunction) -> Result<(bool, f64)> {
    let lat = *range.lattice();
    let rule = band_rule(lat.rank_tol, lat.orth_tol);
    let leaks = par_fibers(lat.n_lambda, |m| Ok(fiber_leak(range.fiber(m).frame(), lat.k, &rule, m)?.0))?;
    let worst = leaks.into_iter().fold(0.0, f64::max);
    Ok((worst <= lat.orth_tol, worst))
}

/// Per-fiber band-invariance leaks.
pub fn invariance_leaks(range: &RangeFunction) -> Result<Vec<f64>> {
    let lat = *range.lattice();
    let rule = band_rule(lat.rank_tol, lat.orth_tol);
    par_fibers(lat.n_lambda, |m| Ok(fiber_leak(range.fiber(m).frame(), lat.k, &rule, m)?.0))
}

/// `‖F S - S F‖_F` on inputs of degree `≤ n_z - 2`, outputs truncated to
/// degree `≤ n_z - 2`.
pub(crate) fn fiber_commutator(a: MatRef<'_, c64>, k: usize) -> f64 {
    let d = a.nrows();
    if d <= k {
        return 0.0;
    }
    let b = d - k;
    let mut acc = 0.0;
    for c in 0..b {
        for r in 0..b {
            let fs = a[(r, c + k)];
            let sf = if r >= k { a[(r - k, c)] } else { c64::new(0.0, 0.0) };
            acc += (fs - sf).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Band-restricted commutation with `S`: `(max defect ≤ orth_tol, max defect)`.
pub fn commutes_with_s(op: &OperatorField) -> (bool, f64) {
    let lat = *op.lattice();
    let worst = commutation_defects(op).into_iter().fold(0.0, f64::max);
    (worst <= lat.orth_tol, worst)
}

/// Per-fiber commutation defects.
pub fn commutation_defects(op: &OperatorField) -> Vec<f64> {
    let k = op.lattice().k;
    op.ops().iter().map(|a| fiber_commutator(a.as_ref(), k)).collect()
}

/// Smallest band-invariant range function containing every band shift
/// `S^j g(λ_m)` (`j ≤ n_z - 1 - deg g(λ_m)`) of the generators.
pub fn s_invariant_closure(gens: &[FiberedField], lat: &TruncationLattice) -> Result<RangeFunction> {
    if gens.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    for g in gens {
        lat.check_shape(g.lattice())?;
    }
    let stacks: Vec<Mat<c64>> = (0..lat.n_lambda)
        .map(|m| {
            let mut cols: Vec<FiberVector> = Vec::new();
            for g in gens {
                let v = g.fiber(m);
                if let Some(deg) = v.z_degree() {
                    let mut w = v.clone();
                    for _ in 0..lat.n_z - deg {
                        let next = shift_fiber(&w);
                        cols.push(w);
                        w = next;
                    }
                }
            }
            Mat::from_fn(lat.ambient(), cols.len(), |r, c| cols[c].coeffs()[r])
        })
        .collect();
    let spans = crate::range::range_of_stacks(lat, &stacks)?;
    invariant_closure(&spans)
}

/// Smallest band-invariant range function containing `range`.
pub fn invariant_closure(range: &RangeFunction) -> Result<RangeFunction> {
    let lat = *range.lattice();
    let fibers = par_fibers(lat.n_lambda, |m| {
        let q = fiber_hull(range.fiber(m).frame().to_owned(), lat.k, &lat, m)?;
        Ok(FiberSubspace::new_unchecked(q))
    })?;
    RangeFunction::from_fibers(lat, fibers)
}
