//! Dense complex kernels shared by the fiber operations.
//!
//! Everything here is single-fiber and sequential; parallelism happens one
//! level up, across fibers.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

/// Singular values at or below `ZERO_REL * scale` count as exact zeros, where
/// `scale` is the largest fiber norm of the field being ranked.
pub const ZERO_REL: f64 = 1e-12;

/// Entries with modulus below this are skipped when fixing column phases.
pub const PHASE_TOL: f64 = 1e-10;

/// A pivot candidate is accepted once its residual reaches this fraction of
/// the largest remaining residual.
const PIVOT_REL: f64 = 1e-3;

pub(crate) fn empty(rows: usize) -> Mat<c64> {
    Mat::zeros(rows, 0)
}

pub(crate) fn fro(m: MatRef<'_, c64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        0.0
    } else {
        m.norm_l2()
    }
}

pub(crate) fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Largest singular value.
pub(crate) fn op_norm(m: MatRef<'_, c64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("{e:?}")))?;
    Ok(sv.into_iter().fold(0.0, f64::max))
}

/// Thin SVD returning left singular vectors and descending singular values.
pub(crate) fn left_svd(a: MatRef<'_, c64>) -> Result<(Mat<c64>, Vec<f64>)> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok((empty(a.nrows()), Vec::new()));
    }
    let svd = a.thin_svd().map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let sigma: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    Ok((svd.U().to_owned(), sigma))
}

/// Rank decision shared by every SVD-based range computation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RankRule {
    pub rank_tol: f64,
    pub zero_floor: f64,
    pub cluster_tol: f64,
}

impl RankRule {
    /// Number of singular values kept, or `ToleranceAmbiguity` when one of
    /// them falls in `[cutoff / 2, 2 * cutoff]`.
    pub fn rank(&self, sigma: &[f64], fiber: usize) -> Result<usize> {
        let smax = sigma.iter().copied().fold(0.0, f64::max);
        if smax <= self.zero_floor {
            return Ok(0);
        }
        let cutoff = self.rank_tol * smax;
        let mut rank = 0;
        for &s in sigma {
            if s <= self.zero_floor {
                continue;
            }
            if s >= 0.5 * cutoff && s <= 2.0 * cutoff {
                return Err(Error::ToleranceAmbiguity { fiber, value: s, cutoff });
            }
            if s >= cutoff {
                rank += 1;
            }
        }
        Ok(rank)
    }
}

/// Orthonormal basis of the column span of `a` in the deterministic order:
/// decreasing singular value, clusters of (numerically) equal singular values
/// replaced by their canonical basis.
pub(crate) fn column_span(a: MatRef<'_, c64>, rule: &RankRule, fiber: usize) -> Result<Mat<c64>> {
    let (u, sigma) = left_svd(a)?;
    let rank = rule.rank(&sigma, fiber)?;
    if rank == 0 {
        return Ok(empty(a.nrows()));
    }
    let smax = sigma[0];
    let mut out = Mat::<c64>::zeros(a.nrows(), rank);
    let mut start = 0;
    while start < rank {
        let mut end = start + 1;
        while end < rank && sigma[end - 1] - sigma[end] <= rule.cluster_tol * smax {
            end += 1;
        }
        let block = canonical_basis(u.as_ref().subcols(start, end - start));
        for c in 0..block.ncols() {
            for r in 0..a.nrows() {
                out[(r, start + c)] = block[(r, c)];
            }
        }
        start = end;
    }
    Ok(out)
}

/// Canonical orthonormal basis of the span of the orthonormal columns `q`.
///
/// Greedy column-echelon construction: coordinate vectors are projected onto
/// the subspace in index order and the first one with a non-negligible
/// residual becomes the next pivot. The result depends on the subspace only,
/// not on the basis it was handed in; each column is then phase-normalized.
pub(crate) fn canonical_basis(q: MatRef<'_, c64>) -> Mat<c64> {
    let (d, c) = (q.nrows(), q.ncols());
    if c == 0 {
        return empty(d);
    }
    // cand[:, idx] holds the coefficients of P e_idx in the basis q.
    let mut cand = q.adjoint().to_owned();
    let mut basis: Vec<Vec<c64>> = Vec::with_capacity(c);
    let mut used = vec![false; d];
    while basis.len() < c {
        let norms: Vec<f64> = (0..d)
            .map(|idx| if used[idx] { 0.0 } else { col_norm(cand.as_ref(), idx) })
            .collect();
        let best = norms.iter().copied().fold(0.0, f64::max);
        if best == 0.0 {
            break;
        }
        let pick = norms.iter().position(|&n| n >= PIVOT_REL * best).unwrap_or(0);
        used[pick] = true;
        let mut v: Vec<c64> = (0..c).map(|r| cand[(r, pick)]).collect();
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n);
        // Deflate every candidate against the new direction.
        for idx in 0..d {
            if used[idx] {
                continue;
            }
            let mut proj = c64::new(0.0, 0.0);
            for r in 0..c {
                proj += v[r].conj() * cand[(r, idx)];
            }
            for r in 0..c {
                cand[(r, idx)] -= proj * v[r];
            }
        }
        basis.push(v);
    }
    let found = basis.len();
    let w = Mat::<c64>::from_fn(c, found, |r, col| basis[col][r]);
    let mut out = q * &w;
    normalize_phases(&mut out);
    out
}

fn col_norm(m: MatRef<'_, c64>, j: usize) -> f64 {
    (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Rotates each column so its first entry above `PHASE_TOL` is real positive.
pub(crate) fn normalize_phases(m: &mut Mat<c64>) {
    for j in 0..m.ncols() {
        if let Some(i) = (0..m.nrows()).find(|&i| m[(i, j)].norm() > PHASE_TOL) {
            let x = m[(i, j)];
            let rot = x.conj() / x.norm();
            for r in 0..m.nrows() {
                m[(r, j)] *= rot;
            }
            m[(i, j)] = c64::new(m[(i, j)].re, 0.0);
        }
    }
}

/// Canonical basis of the orthogonal complement of the orthonormal columns `q`.
pub(crate) fn complement(q: MatRef<'_, c64>) -> Mat<c64> {
    let d = q.nrows();
    let r = q.ncols();
    if r == 0 {
        return canonical_basis(Mat::<c64>::identity(d, d).as_ref());
    }
    if r >= d {
        return empty(d);
    }
    let full = q.qr().compute_Q();
    canonical_basis(full.as_ref().subcols(r, d - r))
}

/// Orthonormalizes columns that are already orthonormal up to rounding.
pub(crate) fn reorthonormalize(a: MatRef<'_, c64>) -> Mat<c64> {
    if a.ncols() == 0 {
        return empty(a.nrows());
    }
    let q = a.qr().compute_thin_Q();
    canonical_basis(q.as_ref())
}

/// Null space of `a` (columns of the returned matrix), using `rule` for the
/// rank of `a`.
pub(crate) fn null_space(a: MatRef<'_, c64>, rule: &RankRule, fiber: usize) -> Result<Mat<c64>> {
    let n = a.ncols();
    if n == 0 {
        return Ok(empty(0));
    }
    if a.nrows() == 0 {
        return Ok(Mat::identity(n, n));
    }
    let svd = a.svd().map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let sigma: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    let rank = rule.rank(&sigma, fiber)?;
    Ok(svd.V().subcols(rank, n - rank).to_owned())
}

/// `‖(I - Q Qᴴ) V‖` in the operator norm, for orthonormal `q`.
pub(crate) fn leak_op(q: MatRef<'_, c64>, v: MatRef<'_, c64>) -> Result<f64> {
    op_norm(residual(q, v).as_ref())
}

/// `‖(I - Q Qᴴ) V‖` in the Frobenius norm (an upper bound on the operator norm).
pub(crate) fn leak_fro(q: MatRef<'_, c64>, v: MatRef<'_, c64>) -> f64 {
    fro(residual(q, v).as_ref())
}

pub(crate) fn residual(q: MatRef<'_, c64>, v: MatRef<'_, c64>) -> Mat<c64> {
    if q.ncols() == 0 || v.ncols() == 0 {
        return v.to_owned();
    }
    let coeff = q.adjoint() * v;
    v - q * &coeff
}

/// Sine of the largest principal angle between two orthonormal frames; 1
/// when the dimensions differ.
pub(crate) fn subspace_distance(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Ok(1.0);
    }
    if a.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(leak_op(a, b)?.min(1.0))
}

/// `‖Qᴴ Q - I‖_max`.
pub(crate) fn orthonormality_defect(q: MatRef<'_, c64>) -> f64 {
    if q.ncols() == 0 {
        return 0.0;
    }
    let mut g = q.adjoint() * q;
    for i in 0..g.nrows() {
        g[(i, i)] -= c64::new(1.0, 0.0);
    }
    max_abs(g.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> RankRule {
        RankRule { rank_tol: 1e-9, zero_floor: 1e-14, cluster_tol: 1e-8 }
    }

    #[test]
    fn canonical_basis_ignores_the_input_basis() {
        let s = 0.5f64.sqrt();
        let a = Mat::<c64>::from_fn(3, 2, |i, j| match (i, j) {
            (0, 0) => c64::new(s, 0.0),
            (1, 0) => c64::new(0.0, s),
            (0, 1) => c64::new(0.0, s),
            (1, 1) => c64::new(s, 0.0),
            _ => c64::new(0.0, 0.0),
        });
        let b = canonical_basis(a.as_ref());
        let id = Mat::<c64>::identity(3, 2);
        assert!(max_abs((&b - &id).as_ref()) < 1e-14);
    }

    #[test]
    fn guard_band_raises_ambiguity() {
        let r = rule();
        assert!(matches!(r.rank(&[1.0, 1.5e-9], 3), Err(Error::ToleranceAmbiguity { fiber: 3, .. })));
        assert_eq!(r.rank(&[1.0, 1e-3, 1e-12], 0).unwrap(), 2);
        assert_eq!(r.rank(&[1e-16], 0).unwrap(), 0);
    }

    #[test]
    fn complement_of_first_axis() {
        let e1 = Mat::<c64>::identity(3, 1);
        let c = complement(e1.as_ref());
        assert_eq!(c.ncols(), 2);
        let expect = Mat::<c64>::from_fn(3, 2, |i, j| if i == j + 1 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        assert!(max_abs((&c - &expect).as_ref()) < 1e-14);
    }

    #[test]
    fn distance_of_equal_spans_is_zero() {
        let a = Mat::<c64>::from_fn(4, 2, |i, j| c64::new((i + j) as f64, (i * j) as f64));
        let q1 = column_span(a.as_ref(), &rule(), 0).unwrap();
        let rot = Mat::<c64>::from_fn(2, 2, |i, j| if i == j { c64::new(0.0, 1.0) } else { c64::new(0.0, 0.0) });
        let q2 = &q1 * &rot;
        assert!(subspace_distance(q1.as_ref(), q2.as_ref()).unwrap() < 1e-12);
        assert!(orthonormality_defect(q1.as_ref()) < 1e-14);
    }
}
