//! Factorization of an `Ŝ`-invariant, `U`-reducing range as the image of a
//! full-Hardy space under a partial isometry commuting with `S`, together
//! with the connecting isometry between two such factorizations and the
//! initial-space test.
//!
//! Exactness is scoped to a per-fiber band `H_L`. `L` is at most `n_z - d`,
//! where `d` is the effective z-degree of the symbol columns `F(λ) ε_i`, so
//! shifts of band inputs never reach the truncation edge. It is further cut
//! at the first shift `S^j φ_i` that leaves `J_M`: a truncated range whose
//! generators carry outer factors is only shift-closed well below the top
//! degrees.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::field::{self, FiberedField};
use crate::full_hardy::fiber_full_hardy;
use crate::lattice::TruncationLattice;
use crate::linalg::{self, RankRule};
use crate::opfield::{block_diag, OperatorField};
use crate::range::range_from_generators;
use crate::shift;
use crate::subspace::{par_fibers, BaseRange, FiberSubspace, RangeFunction};
use crate::wandering::{frame_fields, wandering_range, DimensionPartition, FrameFields};

/// Band-restricted residuals of a factorization. Every entry is a Frobenius
/// norm, hence an upper bound on the corresponding operator norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// `‖Eᴴ E - I‖` for `E = F` on `H²_J ∩ H_L`, and `‖F‖` on its complement.
    pub isometry_defect: f64,
    /// `F(H²_J ∩ H_L)` against `J_M`, in both directions.
    pub image_defect: f64,
    /// `‖F S - S F‖` below the truncation edge.
    pub commutation_defect: f64,
    /// `‖(I - P_{J_M}) S F‖` on `H²_J ∩ H_{L-1}`.
    pub invariance_leak: f64,
}

impl Diagnostics {
    pub const NAMES: [&'static str; 4] = ["isometry_defect", "image_defect", "commutation_defect", "invariance_leak"];

    /// Inverse of [`Diagnostics::values`].
    pub fn from_values(v: [f64; 4]) -> Self {
        Diagnostics { isometry_defect: v[0], image_defect: v[1], commutation_defect: v[2], invariance_leak: v[3] }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.isometry_defect, self.image_defect, self.commutation_defect, self.invariance_leak]
    }

    pub fn entries(&self) -> [(&'static str, f64); 4] {
        let v = self.values();
        [(Self::NAMES[0], v[0]), (Self::NAMES[1], v[1]), (Self::NAMES[2], v[2]), (Self::NAMES[3], v[3])]
    }

    pub fn max(&self) -> f64 {
        self.values().into_iter().fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }

    /// Entrywise maximum.
    pub fn merge(&self, other: &Diagnostics) -> Diagnostics {
        Diagnostics {
            isometry_defect: self.isometry_defect.max(other.isometry_defect),
            image_defect: self.image_defect.max(other.image_defect),
            commutation_defect: self.commutation_defect.max(other.commutation_defect),
            invariance_leak: self.invariance_leak.max(other.invariance_leak),
        }
    }
}

/// `M = Φ(W)` with `W` full-Hardy over `base` and `Φ = F̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub base: BaseRange,
    pub f: OperatorField,
    pub partition: DimensionPartition,
    pub frames: FrameFields,
    /// Reliable band `L` of each fiber.
    pub bands: Vec<usize>,
    /// Maximum of `fiber_diagnostics`.
    pub diagnostics: Diagnostics,
    pub fiber_diagnostics: Vec<Diagnostics>,
}

impl DecompositionResult {
    pub fn lattice(&self) -> &TruncationLattice {
        self.f.lattice()
    }

    /// The same factorization with the base rotated by the unitaries `v`
    /// (`k × k`, one per fiber): `F₂ = F · (I ⊗ V)` and `J₂ = Vᴴ J`. The
    /// connecting isometry from `self` to the result is `I ⊗ V` on `H²_{J₂}`.
    /// Diagnostics are carried over; rerun [`verify_decomposition`] to
    /// recompute them.
    pub fn rotated(&self, v: &[Mat<c64>]) -> Result<DecompositionResult> {
        let lat = *self.lattice();
        let lift = OperatorField::block_lift(lat, v)?;
        let f = self.f.compose(&lift)?;
        let fibers = (0..lat.n_lambda)
            .map(|m| FiberSubspace::new_unchecked(v[m].adjoint() * self.base.fiber(m).frame()))
            .collect();
        Ok(DecompositionResult {
            base: BaseRange::from_fibers(lat, fibers)?,
            f,
            partition: self.partition.clone(),
            frames: self.frames.clone(),
            bands: self.bands.clone(),
            diagnostics: self.diagnostics,
            fiber_diagnostics: self.fiber_diagnostics.clone(),
        })
    }
}

/// Symbol tails are measured against `rank_tol * BAND_TAIL_REL`: truncation
/// errors of `S^j φ` are amplified by the conditioning of `J_M` near the top
/// degrees, so the band must stop well before the tail reaches `rank_tol`.
pub const BAND_TAIL_REL: f64 = 1e-3;

/// Reliable band `L = n_z - d` of an operator commuting with `S`, with `d` the
/// effective degree of its symbol columns `F ε_i`.
pub(crate) fn symbol_band(a: MatRef<'_, c64>, k: usize, rank_tol: f64) -> usize {
    let tol = rank_tol * BAND_TAIL_REL;
    let n_z = a.nrows() / k;
    let d = (0..k)
        .filter_map(|i| {
            let col: Vec<c64> = (0..a.nrows()).map(|r| a[(r, i)]).collect();
            field::effective_degree(&col, k, tol)
        })
        .max()
        .unwrap_or(0);
    n_z - d
}

/// Band of one fiber of a factorization: the symbol band of `a`, cut at the
/// first `j` with some `S^j φ_i` (column `j k + i`) outside `span(q)`.
fn consistent_band(a: MatRef<'_, c64>, q: MatRef<'_, c64>, n: usize, k: usize, rank_tol: f64) -> usize {
    let band = symbol_band(a, k, rank_tol);
    if n == 0 {
        return band;
    }
    let out = linalg::residual(q, a.subcols(0, band * k));
    let tol = rank_tol * BAND_TAIL_REL;
    (0..band)
        .find(|&j| (0..n).any(|i| out.col(j * k + i).norm_l2() > tol))
        .unwrap_or(band)
}

/// Symbol band of every fiber of `op`, from the tails of `F ε_i` alone.
pub fn reliable_bands(op: &OperatorField) -> Vec<usize> {
    let lat = op.lattice();
    op.ops().iter().map(|a| symbol_band(a.as_ref(), lat.k, lat.rank_tol)).collect()
}

/// Lower-triangular block Toeplitz operator with symbol columns `phi`:
/// column `(j, i)` is the truncated `S^j φ_i` for `i < n`, zero otherwise.
fn toeplitz(phi: MatRef<'_, c64>, k: usize) -> Mat<c64> {
    let (d, n) = (phi.nrows(), phi.ncols());
    let n_z = d / k;
    let mut out = Mat::<c64>::zeros(d, d);
    for j in 0..n_z {
        for i in 0..n {
            let col = j * k + i;
            for r in j * k..d {
                out[(r, col)] = phi[(r - j * k, i)];
            }
        }
    }
    out
}

/// `a` applied to `{S^j u : u ∈ base, from ≤ j < to}`, one `D × k` by
/// `k × n` product per degree.
fn apply_lifted(a: MatRef<'_, c64>, base: MatRef<'_, c64>, from: usize, to: usize) -> Mat<c64> {
    let (k, n) = (base.nrows(), base.ncols());
    let mut out = Mat::<c64>::zeros(a.nrows(), (to - from) * n);
    if n == 0 {
        return out;
    }
    for j in from..to {
        let block = a.subcols(j * k, k) * base;
        out.as_mut().subcols_mut((j - from) * n, n).copy_from(&block);
    }
    out
}

/// Theorem-level pipeline on generators: range, wandering part, frames,
/// base `K_n`, and the partial isometry `F`.
pub fn decompose(gens: &[FiberedField], lat: &TruncationLattice) -> Result<DecompositionResult> {
    let jm = range_from_generators(gens, lat)?;
    decompose_range(&jm)
}

/// [`decompose`] starting from the range function `J_M`.
pub fn decompose_range(jm: &RangeFunction) -> Result<DecompositionResult> {
    let lat = *jm.lattice();
    let jr = wandering_range(jm)?;
    let frames = frame_fields(&jr)?;
    let base = BaseRange::leading_coordinates(lat, frames.partition.dims())?;
    let ops = par_fibers(lat.n_lambda, |m| Ok(toeplitz(jr.fiber(m).frame(), lat.k)))?;
    let bands = (0..lat.n_lambda)
        .map(|m| consistent_band(ops[m].as_ref(), jm.fiber(m).frame(), jr.fiber(m).rank(), lat.k, lat.rank_tol))
        .collect();
    let mut res = DecompositionResult {
        base,
        f: OperatorField::from_ops(lat, ops)?,
        partition: frames.partition.clone(),
        frames,
        bands,
        diagnostics: Diagnostics::default(),
        fiber_diagnostics: Vec::new(),
    };
    res.fiber_diagnostics = verify_decomposition_fibers(&res, jm)?;
    res.diagnostics = merge_all(&res.fiber_diagnostics);
    Ok(res)
}

fn fiber_diagnostics(res: &DecompositionResult, jm: &RangeFunction, m: usize) -> Result<Diagnostics> {
    let lat = *res.lattice();
    let (k, n_z) = (lat.k, lat.n_z);
    let a = res.f.op(m);
    let q = jm.fiber(m).frame();
    let band = res.bands[m].min(symbol_band(a, k, lat.rank_tol));
    let basis = res.base.fiber(m);
    let e = apply_lifted(a, basis.frame(), 0, band);

    let mut gram = e.adjoint() * &e;
    for i in 0..gram.nrows() {
        gram[(i, i)] -= c64::new(1.0, 0.0);
    }
    let off = linalg::fro(apply_lifted(a, basis.complement().frame(), 0, band).as_ref());
    let isometry_defect = linalg::fro(gram.as_ref()).max(off);

    // F(W_band) ⊆ J_M ⊆ F(W). The intersection J_M ∩ H_band is avoided: with
    // outer factors it is cut out by constraints of size |b|^(n_z - band).
    let forward = linalg::leak_fro(q, e.as_ref());
    let scale = linalg::fro(e.as_ref());
    let rule = RankRule { rank_tol: lat.rank_tol, zero_floor: linalg::ZERO_REL * scale.max(1.0), cluster_tol: lat.orth_tol };
    let t = if isometry_defect <= lat.orth_tol { e.clone() } else { linalg::column_span(e.as_ref(), &rule, m)? };
    let n = basis.rank();
    let tail = linalg::residual(t.as_ref(), apply_lifted(a, basis.frame(), band, n_z).as_ref());
    let (u, sigma) = linalg::left_svd(tail.as_ref())?;
    // The tail columns are exact images, not data: their small singular values
    // are Toeplitz conditioning (zeros of φ inside the disc), so only roundoff
    // is dropped.
    let floor = linalg::ZERO_REL * scale.max(sigma.first().copied().unwrap_or(0.0)).max(1.0);
    let extra = sigma.iter().take_while(|&&s| s > floor).count();
    let mut reach = Mat::<c64>::zeros(q.nrows(), t.ncols() + extra);
    reach.as_mut().subcols_mut(0, t.ncols()).copy_from(&t);
    reach.as_mut().subcols_mut(t.ncols(), extra).copy_from(u.as_ref().subcols(0, extra));
    // Directions from tiny residuals lose orthogonality to `t`; restore it.
    let reach = reach.qr().compute_thin_Q();
    let backward = linalg::leak_fro(reach.as_ref(), q);
    let image_defect = forward.max(backward);

    let commutation_defect = shift::fiber_commutator(a, k);

    let inner = e.as_ref().subcols(0, band.saturating_sub(1) * n);
    let invariance_leak = linalg::leak_fro(q, shift::shift_rows(inner, k, 1).as_ref());

    Ok(Diagnostics { isometry_defect, image_defect, commutation_defect, invariance_leak })
}

/// Per-fiber diagnostics of a factorization against `J_M`.
pub fn verify_decomposition_fibers(res: &DecompositionResult, jm: &RangeFunction) -> Result<Vec<Diagnostics>> {
    res.lattice().check_shape(jm.lattice())?;
    res.lattice().check_shape(res.base.lattice())?;
    if res.bands.len() != res.lattice().n_lambda {
        return Err(Error::LatticeMismatch(format!("{} bands for {} fibers", res.bands.len(), res.lattice().n_lambda)));
    }
    par_fibers(res.lattice().n_lambda, |m| fiber_diagnostics(res, jm, m))
}

/// Recomputes the band-restricted diagnostics, maximized over fibers.
pub fn verify_decomposition(res: &DecompositionResult, jm: &RangeFunction) -> Result<Diagnostics> {
    Ok(merge_all(&verify_decomposition_fibers(res, jm)?))
}

pub fn merge_all(per: &[Diagnostics]) -> Diagnostics {
    per.iter().fold(Diagnostics::default(), |acc, d| acc.merge(d))
}

/// Band-restricted residuals of a connecting isometry `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConnectionDiagnostics {
    /// `Ψ` isometric on `H²_{J₂}` and zero on its complement.
    pub partial_isometry_defect: f64,
    /// `‖F₂ - F₁ Ψ‖`.
    pub factorization_residual: f64,
    /// Subspace distance between `Ψ(H²_{J₂})` and `H²_{J₁}`.
    pub image_distance: f64,
}

impl ConnectionDiagnostics {
    pub fn max(&self) -> f64 {
        self.partial_isometry_defect.max(self.factorization_residual).max(self.image_distance)
    }
}

/// `Ψ` with `Φ₂ = Φ₁ Ψ` and `Ψ(W₂) = W₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub psi: OperatorField,
    /// The `k × k` symbol `G(λ_m)` with `Ψ(λ_m) = I ⊗ G(λ_m)`.
    pub symbols: Vec<Mat<c64>>,
    pub diagnostics: ConnectionDiagnostics,
}

fn symbol_block(a: MatRef<'_, c64>, k: usize) -> MatRef<'_, c64> {
    a.subcols(0, k)
}

/// Connecting isometry between two factorizations of the same range.
///
/// `Ψ(λ) = I ⊗ G(λ)` with `G = Σ_d Θ₁_dᴴ Θ₂_d` built from the symbol blocks
/// `Θ_d` (degree-`d` coefficients of `F ε_i`). On the band this is
/// `F₁(λ)ᴴ F₂(λ)`, and the lift commutes with `S` exactly.
pub fn connecting_isometry(res1: &DecompositionResult, res2: &DecompositionResult) -> Result<Connection> {
    let lat = *res1.lattice();
    lat.check_shape(res2.lattice())?;
    let (k, n_z) = (lat.k, lat.n_z);
    let tol = 10.0 * lat.orth_tol;
    let per = par_fibers(lat.n_lambda, |m| {
        let (a1, a2) = (res1.f.op(m), res2.f.op(m));
        let band = res1.bands[m].min(res2.bands[m]);
        let (b1, b2) = (res1.base.fiber(m), res2.base.fiber(m));
        let e1 = apply_lifted(a1, b1.frame(), 0, band);
        let e2 = apply_lifted(a2, b2.frame(), 0, band);
        let distance = if e1.ncols() != e2.ncols() {
            1.0
        } else {
            linalg::subspace_distance(linalg::reorthonormalize(e1.as_ref()).as_ref(), linalg::reorthonormalize(e2.as_ref()).as_ref())?
        };
        if distance > tol {
            return Err(Error::ImagesDiffer { fiber: m, distance });
        }
        let g = symbol_block(a1, k).adjoint() * symbol_block(a2, k);

        let gb = &g * b2.frame();
        let mut gram = gb.adjoint() * &gb;
        for i in 0..gram.nrows() {
            gram[(i, i)] -= c64::new(1.0, 0.0);
        }
        let off = linalg::fro((&g * b2.complement().frame()).as_ref());
        let scale = (band as f64).sqrt();
        let partial_isometry_defect = scale * linalg::fro(gram.as_ref()).max(off);

        let mut residual = 0.0;
        for j in 0..band {
            let lhs = a2.subcols(j * k, k);
            let rhs = a1.subcols(j * k, k) * &g;
            residual += linalg::fro((lhs - &rhs).as_ref()).powi(2);
        }
        let factorization_residual = residual.sqrt();

        let image_distance = if gb.ncols() != b1.rank() {
            1.0
        } else {
            linalg::subspace_distance(linalg::reorthonormalize(gb.as_ref()).as_ref(), b1.frame())?
        };
        let diag = ConnectionDiagnostics { partial_isometry_defect, factorization_residual, image_distance };
        Ok((g, diag))
    })?;
    let mut diagnostics = ConnectionDiagnostics::default();
    let mut symbols = Vec::with_capacity(per.len());
    for (g, d) in per {
        diagnostics.partial_isometry_defect = diagnostics.partial_isometry_defect.max(d.partial_isometry_defect);
        diagnostics.factorization_residual = diagnostics.factorization_residual.max(d.factorization_residual);
        diagnostics.image_distance = diagnostics.image_distance.max(d.image_distance);
        symbols.push(g);
    }
    let psi = OperatorField::from_ops(lat, symbols.iter().map(|g| block_diag(g.as_ref(), n_z)).collect())?;
    Ok(Connection { psi, symbols, diagnostics })
}

/// Initial space of a partial isometry field commuting with `S`, tested for
/// the full-Hardy form on each fiber's reliable band. Returns the base when
/// every fiber passes.
pub fn initial_space_is_full_hardy(op: &OperatorField) -> Result<Option<BaseRange>> {
    let lat = *op.lattice();
    let k = lat.k;
    let found = par_fibers(lat.n_lambda, |m| {
        let a = op.op(m);
        let defect = shift::fiber_commutator(a, k);
        if defect > lat.orth_tol {
            return Err(Error::NotCommuting { fiber: m, defect });
        }
        let band = symbol_band(a, k, lat.rank_tol);
        let cols = a.subcols(0, band * k);
        let svd = cols.thin_svd().map_err(|e| Error::Numerical(format!("{e:?}")))?;
        let s = svd.S().column_vector();
        let mut keep = 0;
        for i in 0..s.nrows() {
            let sigma = s[i].re;
            if (sigma - 1.0).abs() <= lat.orth_tol {
                keep += 1;
            } else if sigma > lat.orth_tol {
                return Err(Error::NotPartialIsometry { fiber: m, value: sigma });
            }
        }
        let v = svd.V().subcols(0, keep);
        fiber_full_hardy(v, k, lat.rank_tol, lat.orth_tol, m)
    })?;
    let Some(frames) = found.into_iter().collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let fibers = frames.into_iter().map(FiberSubspace::new_unchecked).collect();
    Ok(Some(BaseRange::from_fibers(lat, fibers)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eval_field, FiberVector, LaurentPolyField};
    use crate::shift::commutes_with_s;

    fn one() -> c64 {
        c64::new(1.0, 0.0)
    }

    fn lat() -> TruncationLattice {
        TruncationLattice::new(4, 6, 2).unwrap()
    }

    fn closed(p: &LaurentPolyField, lat: &TruncationLattice) -> Vec<FiberedField> {
        let deg = p.z_degree().unwrap();
        (0..lat.n_z - deg).map(|j| eval_field(&p.shifted(j), lat).unwrap()).collect()
    }

    #[test]
    fn constant_generator_is_already_full_hardy() {
        let l = lat();
        let res = decompose(&closed(&LaurentPolyField::default().term(0, 0, 0, one()), &l), &l).unwrap();
        assert!(res.diagnostics.max() <= 1e-12);
        let e1 = BaseRange::leading_coordinates(l, &[1; 4]).unwrap();
        assert!(res.base.distance(&e1).unwrap() == 0.0);
        for m in 0..4 {
            for j in 0..l.n_z {
                let c = l.index(j, 0);
                assert!((res.f.op(m)[(c, c)] - one()).norm() < 1e-14);
            }
        }
        assert!(commutes_with_s(&res.f).0);
    }

    #[test]
    fn shifted_generator_gives_a_pure_shift() {
        let l = lat();
        let res = decompose(&closed(&LaurentPolyField::default().term(0, 1, 0, one()), &l), &l).unwrap();
        assert!(res.diagnostics.within(l.orth_tol));
        let a = res.f.op(0);
        for j in 0..l.n_z - 1 {
            let v = FiberVector::basis(l.n_z, l.k, j + 1, 0);
            for r in 0..l.ambient() {
                assert!((a[(r, l.index(j, 0))] - v.coeffs()[r]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn indicator_support_zeroes_odd_fibers() {
        let l = lat();
        let half = c64::new(0.5, 0.0);
        let p = LaurentPolyField::default().term(0, 0, 0, half).term(2, 0, 0, half);
        let res = decompose(&closed(&p, &l), &l).unwrap();
        assert_eq!(res.partition.class(1), &[0, 2]);
        assert_eq!(res.partition.class(0), &[1, 3]);
        assert_eq!(linalg::max_abs(res.f.op(1)), 0.0);
        assert!(res.diagnostics.within(l.orth_tol));
    }

    #[test]
    fn rejects_non_invariant_generators() {
        let l = lat();
        let g = eval_field(&LaurentPolyField::default().term(0, 0, 0, one()), &l).unwrap();
        assert!(matches!(decompose(&[g], &l), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn corrupted_operator_is_detected() {
        let l = lat();
        let gens = closed(&LaurentPolyField::default().term(0, 0, 0, one()).term(1, 1, 1, c64::new(0.4, 0.0)), &l);
        let jm = range_from_generators(&gens, &l).unwrap();
        let mut res = decompose_range(&jm).unwrap();
        assert!(res.diagnostics.within(l.orth_tol));
        for r in 0..l.ambient() {
            res.f.op_mut(0)[(r, 0)] = c64::new(0.0, 0.0);
        }
        assert!(verify_decomposition(&res, &jm).unwrap().image_defect > 0.5);
    }

    #[test]
    fn degenerate_zero_case() {
        let l = lat();
        let jm = RangeFunction::zero(l);
        let res = decompose_range(&jm).unwrap();
        assert_eq!(verify_decomposition(&res, &jm).unwrap(), Diagnostics::default());
    }

    #[test]
    fn self_connection_is_the_base_projector() {
        let l = lat();
        let half = c64::new(0.5, 0.0);
        let p = LaurentPolyField::default().term(0, 0, 0, half).term(2, 0, 0, half).term(0, 1, 1, one());
        let res = decompose(&closed(&p, &l), &l).unwrap();
        let c = connecting_isometry(&res, &res).unwrap();
        assert!(c.diagnostics.max() < 1e-12);
        for m in 0..4 {
            let w = crate::full_hardy::lift_frame(res.base.fiber(m).frame(), l.n_z);
            let p = &w * w.adjoint();
            assert!(linalg::max_abs((c.psi.op(m) - &p).as_ref()) < 1e-12);
        }
    }

    #[test]
    fn permuted_base_connects_through_the_permutation() {
        let l = lat();
        let gens: Vec<FiberedField> = closed(&LaurentPolyField::default().term(0, 0, 0, one()), &l)
            .into_iter()
            .chain(closed(&LaurentPolyField::default().term(0, 0, 1, one()).term(1, 1, 1, c64::new(0.3, 0.0)), &l))
            .collect();
        let res = decompose(&gens, &l).unwrap();
        let swap = Mat::<c64>::from_fn(2, 2, |r, c| if r != c { one() } else { c64::new(0.0, 0.0) });
        let res2 = res.rotated(&vec![swap.clone(); 4]).unwrap();
        let c = connecting_isometry(&res, &res2).unwrap();
        assert!(c.diagnostics.max() < 1e-10);
        for g in &c.symbols {
            assert!(linalg::max_abs((g - &swap).as_ref()) < 1e-12);
        }
    }

    #[test]
    fn different_ranges_do_not_connect() {
        let l = lat();
        let a = decompose(&closed(&LaurentPolyField::default().term(0, 0, 0, one()), &l), &l).unwrap();
        let b = decompose(&closed(&LaurentPolyField::default().term(0, 0, 1, one()), &l), &l).unwrap();
        assert!(matches!(connecting_isometry(&a, &b), Err(Error::ImagesDiffer { .. })));
    }

    #[test]
    fn initial_space_cases() {
        let l = lat();
        let full = initial_space_is_full_hardy(&OperatorField::identity(l)).unwrap().unwrap();
        assert!(full.distance(&BaseRange::full(l)).unwrap() < 1e-12);

        let p = LaurentPolyField::default().term(0, 1, 0, one()).term(0, 0, 0, c64::new(-0.5, 0.0));
        let res = decompose(&closed(&p, &l), &l).unwrap();
        let base = initial_space_is_full_hardy(&res.f).unwrap().unwrap();
        assert!(base.distance(&res.base).unwrap() < 1e-10);

        let half = OperatorField::scalar(l, |_| c64::new(0.5, 0.0));
        assert!(matches!(initial_space_is_full_hardy(&half), Err(Error::NotPartialIsometry { .. })));
    }
}
