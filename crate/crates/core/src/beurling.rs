//! Scalar case `K = C`: inner functions of shift-invariant subspaces of `H²`,
//! the inner field `φ` with `M = φ L²(𝕋, H²)`, its range function, and the
//! unimodular quotient of two such fields.

use std::f64::consts::PI;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::factorization::DecompositionResult;
use crate::field;
use crate::lattice::TruncationLattice;
use crate::linalg::{self, RankRule};
use crate::shift;
use crate::subspace::{par_fibers, FiberSubspace, RangeFunction};
use crate::wandering::fiber_wandering;

/// Boundary checks sample `|h|` at this many points per retained degree.
pub const BOUNDARY_OVERSAMPLING: usize = 4;

/// Truncated scalar Hardy function `h(z) = Σ_{j < n_z} coeffs[j] z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarH2 {
    coeffs: Vec<c64>,
}

impl ScalarH2 {
    pub fn new(coeffs: Vec<c64>) -> Self {
        assert!(!coeffs.is_empty(), "a scalar H² element needs n_z ≥ 1 coefficients");
        ScalarH2 { coeffs }
    }

    pub fn zeros(n_z: usize) -> Self {
        Self::new(vec![c64::new(0.0, 0.0); n_z])
    }

    /// `c z^degree`.
    pub fn monomial(n_z: usize, degree: usize, c: c64) -> Self {
        let mut h = Self::zeros(n_z);
        h.coeffs[degree] = c;
        h
    }

    /// Polynomial with the given low-order coefficients, zero-padded to `n_z`.
    pub fn polynomial(n_z: usize, low: &[c64]) -> Self {
        assert!(low.len() <= n_z, "polynomial degree exceeds the truncation");
        let mut h = Self::zeros(n_z);
        h.coeffs[..low.len()].copy_from_slice(low);
        h
    }

    pub fn n_z(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[c64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == c64::new(0.0, 0.0))
    }

    /// `‖h‖_{H²}` (normalized arc length).
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: c64) -> ScalarH2 {
        ScalarH2 { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Horner evaluation.
    pub fn eval(&self, z: c64) -> c64 {
        self.coeffs.iter().rev().fold(c64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `h` on `points` equispaced points of the unit circle.
    pub fn boundary_values(&self, points: usize) -> Vec<c64> {
        (0..points)
            .map(|t| {
                let theta = 2.0 * PI * t as f64 / points as f64;
                self.eval(c64::new(theta.cos(), theta.sin()))
            })
            .collect()
    }

    /// `max_t | |h(z_t)| - 1 |` on `4 n_z` boundary points.
    pub fn inner_defect(&self) -> f64 {
        self.boundary_values(BOUNDARY_OVERSAMPLING * self.n_z())
            .into_iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn as_column(&self) -> Mat<c64> {
        Mat::from_fn(self.n_z(), 1, |r, _| self.coeffs[r])
    }
}

/// `λ ↦ φ(λ)` with `φ(λ_m)` inner on the support and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerField {
    lattice: TruncationLattice,
    fibers: Vec<ScalarH2>,
    support: Vec<usize>,
    defects: Vec<f64>,
}

impl InnerField {
    /// Wraps per-fiber functions; the support is the set of nonzero fibers.
    pub fn new(lattice: TruncationLattice, fibers: Vec<ScalarH2>) -> Result<Self> {
        if lattice.k != 1 {
            return Err(Error::InvalidLattice(format!("inner fields need k = 1, got {}", lattice.k)));
        }
        if fibers.len() != lattice.n_lambda || fibers.iter().any(|h| h.n_z() != lattice.n_z) {
            return Err(Error::LatticeMismatch("inner field fibers must match (n_lambda, n_z)".into()));
        }
        let support = (0..fibers.len()).filter(|&m| !fibers[m].is_zero()).collect::<Vec<_>>();
        let defects = fibers.iter().map(|h| if h.is_zero() { 0.0 } else { h.inner_defect() }).collect();
        Ok(InnerField { lattice, fibers, support, defects })
    }

    pub fn lattice(&self) -> &TruncationLattice {
        &self.lattice
    }

    pub fn fibers(&self) -> &[ScalarH2] {
        &self.fibers
    }

    pub fn fiber(&self, m: usize) -> &ScalarH2 {
        &self.fibers[m]
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Per-fiber inner defect (zero off the support).
    pub fn defects(&self) -> &[f64] {
        &self.defects
    }

    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }

    /// `λ_m ↦ s(m) φ(λ_m)`.
    pub fn scaled(&self, s: impl Fn(usize) -> c64) -> Result<InnerField> {
        let fibers = self.fibers.iter().enumerate().map(|(m, h)| h.scaled(s(m))).collect();
        InnerField::new(self.lattice, fibers)
    }
}

/// Inner function `h` with `M = h H²` for the smallest band-invariant `M`
/// containing the generators, and its boundary defect.
pub fn inner_from_invariant(gens: &[ScalarH2], rank_tol: f64, orth_tol: f64) -> Result<(ScalarH2, f64)> {
    let first = gens.first().ok_or(Error::EmptyGenerators)?;
    let n_z = first.n_z();
    if gens.iter().any(|g| g.n_z() != n_z) {
        return Err(Error::LatticeMismatch("generators have different truncations".into()));
    }
    let lat = TruncationLattice::with_tolerances(1, n_z, 1, rank_tol, orth_tol)?;
    let mut cols: Vec<Vec<c64>> = Vec::new();
    for g in gens {
        if let Some(deg) = field::effective_degree(g.coeffs(), 1, 0.0) {
            for j in 0..n_z - deg {
                let mut v = vec![c64::new(0.0, 0.0); n_z];
                v[j..].copy_from_slice(&g.coeffs()[..n_z - j]);
                cols.push(v);
            }
        }
    }
    let stack = Mat::from_fn(n_z, cols.len(), |r, c| cols[c][r]);
    let rule = RankRule { rank_tol, zero_floor: linalg::ZERO_REL * linalg::fro(stack.as_ref()), cluster_tol: orth_tol };
    let span = linalg::column_span(stack.as_ref(), &rule, 0)?;
    let hull = shift::fiber_hull(span, 1, &lat, 0)?;
    let w = fiber_wandering(hull.as_ref(), 1, rank_tol, orth_tol, 0)?;
    if w.ncols() != 1 {
        return Err(Error::WanderingRankNotOne { rank: w.ncols() });
    }
    let h = ScalarH2::new((0..n_z).map(|r| w[(r, 0)]).collect());
    let defect = h.inner_defect();
    Ok((h, defect))
}

/// `φ(λ_m) = F(λ_m) 1` for a `k = 1` factorization; every supported fiber
/// must be inner within `inner_tol`.
pub fn phi_representation(res: &DecompositionResult, inner_tol: f64) -> Result<InnerField> {
    let lat = *res.lattice();
    if lat.k != 1 {
        return Err(Error::InvalidLattice(format!("phi representation needs k = 1, got {}", lat.k)));
    }
    let fibers = (0..lat.n_lambda)
        .map(|m| {
            if res.base.fiber(m).rank() == 0 {
                ScalarH2::zeros(lat.n_z)
            } else {
                let a = res.f.op(m);
                ScalarH2::new((0..lat.n_z).map(|r| a[(r, 0)]).collect())
            }
        })
        .collect();
    let phi = InnerField::new(lat, fibers)?;
    let worst = phi.defects.iter().enumerate().fold((0, 0.0), |acc, (m, &d)| if d > acc.1 { (m, d) } else { acc });
    if worst.1 > inner_tol {
        return Err(Error::NotInner { fiber: worst.0, defect: worst.1 });
    }
    Ok(phi)
}

/// Band of `h`: shifts `S^j h` with `j < n_z - d` stay clear of the edge.
fn phi_band(h: &ScalarH2, tol: f64) -> usize {
    h.n_z() - field::effective_degree(h.coeffs(), 1, tol).unwrap_or(0)
}

fn band_span(h: &ScalarH2, band: usize, rank_tol: f64, orth_tol: f64, fiber: usize) -> Result<Mat<c64>> {
    let col = h.as_column();
    let mut stack = Mat::<c64>::zeros(h.n_z(), band);
    for j in 0..band {
        stack.as_mut().subcols_mut(j, 1).copy_from(&shift::shift_rows(col.as_ref(), 1, j));
    }
    let rule = RankRule { rank_tol, zero_floor: linalg::ZERO_REL * linalg::fro(stack.as_ref()), cluster_tol: orth_tol };
    linalg::column_span(stack.as_ref(), &rule, fiber)
}

/// `λ ↦ φ(λ) H²`, spanned by the band shifts of `φ(λ_m)`.
pub fn range_of_phi(phi: &InnerField) -> Result<RangeFunction> {
    let lat = phi.lattice;
    let fibers = par_fibers(lat.n_lambda, |m| {
        let h = &phi.fibers[m];
        if h.is_zero() {
            return Ok(FiberSubspace::zero(lat.n_z));
        }
        let band = phi_band(h, lat.rank_tol);
        Ok(FiberSubspace::new_unchecked(band_span(h, band, lat.rank_tol, lat.orth_tol, m)?))
    })?;
    RangeFunction::from_fibers(lat, fibers)
}

/// `ψ` with `φ₁ = ψ φ₂`: on each supported fiber `ψ(λ_m) = ⟨φ₁, φ₂⟩`, a
/// unimodular constant. The identity `φ₁ = ψ φ₂` is verified coefficientwise.
pub fn inner_quotient(phi1: &InnerField, phi2: &InnerField, inner_tol: f64) -> Result<InnerField> {
    let lat = phi1.lattice;
    lat.check_shape(&phi2.lattice)?;
    if phi1.support != phi2.support {
        return Err(Error::RangesDiffer(format!(
            "supports differ ({} vs {} fibers)",
            phi1.support.len(),
            phi2.support.len()
        )));
    }
    let tol = 10.0 * lat.orth_tol;
    let quotients = par_fibers(lat.n_lambda, |m| {
        let (h1, h2) = (&phi1.fibers[m], &phi2.fibers[m]);
        if h1.is_zero() {
            return Ok(ScalarH2::zeros(lat.n_z));
        }
        let band = phi_band(h1, lat.rank_tol).min(phi_band(h2, lat.rank_tol));
        let b1 = band_span(h1, band, lat.rank_tol, lat.orth_tol, m)?;
        let b2 = band_span(h2, band, lat.rank_tol, lat.orth_tol, m)?;
        let distance = linalg::subspace_distance(b1.as_ref(), b2.as_ref())?;
        if distance > tol {
            return Err(Error::RangesDiffer(format!("fiber {m}: band distance {distance:.3e}")));
        }
        let c: c64 = h1.coeffs.iter().zip(&h2.coeffs).map(|(a, b)| a * b.conj()).sum();
        if (c.norm() - 1.0).abs() > inner_tol {
            return Err(Error::NotUnimodular { fiber: m, modulus: c.norm() });
        }
        let residual = h1.coeffs.iter().zip(&h2.coeffs).map(|(a, b)| (a - c * b).norm()).fold(0.0, f64::max);
        if residual > lat.orth_tol {
            return Err(Error::QuotientResidual { fiber: m, residual });
        }
        Ok(ScalarH2::monomial(lat.n_z, 0, c))
    })?;
    InnerField::new(lat, quotients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::decompose;
    use crate::field::{eval_field, LaurentPolyField};

    fn one() -> c64 {
        c64::new(1.0, 0.0)
    }

    fn blaschke(a: c64, n: usize) -> Vec<c64> {
        // (z - a)/(1 - conj(a) z) = -a + (1 - |a|²) Σ_{j≥1} conj(a)^{j-1} z^j
        let mut out = vec![-a];
        let mut p = one();
        for _ in 1..n {
            out.push((1.0 - a.norm_sqr()) * p);
            p *= a.conj();
        }
        out
    }

    fn aligned_error(h: &ScalarH2, oracle: &[c64]) -> f64 {
        let c: c64 = h.coeffs().iter().zip(oracle).map(|(x, y)| y * x.conj()).sum();
        let rot = c / c.norm();
        h.coeffs().iter().zip(oracle).map(|(x, y)| (x * rot - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn monomial_generator() {
        let g = ScalarH2::monomial(16, 1, one());
        let (h, defect) = inner_from_invariant(std::slice::from_ref(&g), 1e-9, 1e-8).unwrap();
        assert!(aligned_error(&h, g.coeffs()) < 1e-12);
        assert!(defect <= 1e-12);
        assert_eq!(h.coeffs()[1], one());
    }

    #[test]
    fn blaschke_factor_inside_the_disc() {
        let n = 64;
        for a in [c64::new(0.5, 0.0), c64::new(0.0, 0.3)] {
            let g = ScalarH2::polynomial(n, &[-a, one()]);
            let (h, defect) = inner_from_invariant(&[g], 1e-9, 1e-8).unwrap();
            assert!(aligned_error(&h, &blaschke(a, n)) < 1e-10, "a = {a}");
            assert!(defect < 1e-10);
            assert!((h.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outer_factor_gives_a_constant() {
        let g = ScalarH2::polynomial(64, &[c64::new(-2.0, 0.0), one()]);
        let (h, _) = inner_from_invariant(&[g.scaled(c64::new(0.0, 1.0))], 1e-9, 1e-8).unwrap();
        assert!(aligned_error(&h, &ScalarH2::monomial(64, 0, one()).coeffs) < 1e-12);
        assert!(h.coeffs()[0].re > 0.0 && h.coeffs()[0].im == 0.0);
    }

    #[test]
    fn zero_generators_are_rejected() {
        assert!(matches!(inner_from_invariant(&[ScalarH2::zeros(8)], 1e-9, 1e-8), Err(Error::WanderingRankNotOne { rank: 0 })));
        assert!(matches!(inner_from_invariant(&[], 1e-9, 1e-8), Err(Error::EmptyGenerators)));
    }

    fn closed(p: &LaurentPolyField, lat: &TruncationLattice) -> Vec<crate::field::FiberedField> {
        let deg = p.z_degree().unwrap();
        (0..lat.n_z - deg).map(|j| eval_field(&p.shifted(j), lat).unwrap()).collect()
    }

    #[test]
    fn phi_of_the_whole_space_is_one() {
        let lat = TruncationLattice::new(4, 8, 1).unwrap();
        let res = decompose(&closed(&LaurentPolyField::default().term(0, 0, 0, one()), &lat), &lat).unwrap();
        let phi = phi_representation(&res, 1e-6).unwrap();
        assert_eq!(phi.support(), &[0, 1, 2, 3]);
        assert!(phi.fibers().iter().all(|h| *h == ScalarH2::monomial(8, 0, one())));
        let range = range_of_phi(&phi).unwrap();
        assert!(range.ranks().iter().all(|&r| r == 8));
    }

    #[test]
    fn phi_of_z() {
        let lat = TruncationLattice::new(3, 8, 1).unwrap();
        let res = decompose(&closed(&LaurentPolyField::default().term(0, 1, 0, one()), &lat), &lat).unwrap();
        let phi = phi_representation(&res, 1e-6).unwrap();
        assert!(phi.fibers().iter().all(|h| *h == ScalarH2::monomial(8, 1, one())));
        let range = range_of_phi(&phi).unwrap();
        let expect = RangeFunction::constant(lat, &FiberSubspace::coordinates(8, &(1..8).collect::<Vec<_>>())).unwrap();
        assert!(range.distance(&expect).unwrap() < 1e-14);
    }

    #[test]
    fn quotient_cases() {
        let lat = TruncationLattice::new(4, 32, 1).unwrap();
        let p = LaurentPolyField::default().term(0, 1, 0, one()).term(0, 0, 0, c64::new(-0.5, 0.0));
        let res = decompose(&closed(&p, &lat), &lat).unwrap();
        let phi = phi_representation(&res, 1e-6).unwrap();
        let psi = inner_quotient(&phi, &phi, 1e-6).unwrap();
        assert!(psi.fibers().iter().all(|h| (h.coeffs()[0] - one()).norm() < 1e-12));

        let rotated = phi.scaled(|m| lat.lambda(m)).unwrap();
        let psi = inner_quotient(&phi, &rotated, 1e-6).unwrap();
        for m in 0..4 {
            assert!((psi.fiber(m).coeffs()[0] - lat.lambda_pow(m, -1)).norm() < 1e-12);
        }

        let mut fibers = phi.fibers().to_vec();
        fibers[1] = ScalarH2::zeros(32);
        let cut = InnerField::new(lat, fibers).unwrap();
        assert!(matches!(inner_quotient(&phi, &cut, 1e-6), Err(Error::RangesDiffer(_))));
    }
}
