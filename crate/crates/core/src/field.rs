use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lattice::TruncationLattice;

/// An element of the truncated `H²_K`: coefficients indexed by
/// (z-degree `j`, coordinate `i`), stored flat at `j * k + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberVector {
    n_z: usize,
    k: usize,
    coeffs: Vec<c64>,
}

impl FiberVector {
    pub fn zeros(n_z: usize, k: usize) -> Self {
        FiberVector { n_z, k, coeffs: vec![c64::new(0.0, 0.0); n_z * k] }
    }

    pub fn from_coeffs(n_z: usize, k: usize, coeffs: Vec<c64>) -> Self {
        assert_eq!(coeffs.len(), n_z * k, "coefficient length must be n_z * k");
        FiberVector { n_z, k, coeffs }
    }

    /// The constant function `ε_i` (degree 0, coordinate `i`).
    pub fn basis(n_z: usize, k: usize, j: usize, i: usize) -> Self {
        let mut v = Self::zeros(n_z, k);
        v.coeffs[j * k + i] = c64::new(1.0, 0.0);
        v
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[c64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [c64] {
        &mut self.coeffs
    }

    pub fn get(&self, j: usize, i: usize) -> c64 {
        self.coeffs[j * self.k + i]
    }

    pub fn set(&mut self, j: usize, i: usize, value: c64) {
        self.coeffs[j * self.k + i] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩`, linear in the first argument.
    pub fn inner(&self, other: &FiberVector) -> c64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum()
    }

    /// Largest `j` with a nonzero coefficient; `None` for the zero vector.
    pub fn z_degree(&self) -> Option<usize> {
        (0..self.n_z)
            .rev()
            .find(|&j| (0..self.k).any(|i| self.get(j, i) != c64::new(0.0, 0.0)))
    }

    /// Smallest `d` whose tail (degrees above `d`) has norm at most `tol`.
    pub fn effective_degree(&self, tol: f64) -> Option<usize> {
        effective_degree(&self.coeffs, self.k, tol)
    }

    pub fn scaled(&self, s: c64) -> FiberVector {
        FiberVector { n_z: self.n_z, k: self.k, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn as_column(&self) -> Mat<c64> {
        Mat::from_fn(self.coeffs.len(), 1, |r, _| self.coeffs[r])
    }
}

/// Tail-based numerical degree of a flat coefficient array with `k`
/// coordinates per degree.
pub(crate) fn effective_degree(coeffs: &[c64], k: usize, tol: f64) -> Option<usize> {
    let n_z = coeffs.len() / k;
    let mut tail = 0.0;
    for j in (0..n_z).rev() {
        let block: f64 = coeffs[j * k..(j + 1) * k].iter().map(|c| c.norm_sqr()).sum();
        if (tail + block).sqrt() > tol {
            return Some(j);
        }
        tail += block;
    }
    None
}

/// A function `λ ↦ f(λ) ∈ H²_K` sampled on the lattice grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberedField {
    lattice: TruncationLattice,
    fibers: Vec<FiberVector>,
}

impl FiberedField {
    pub fn zeros(lattice: TruncationLattice) -> Self {
        let fibers = (0..lattice.n_lambda).map(|_| FiberVector::zeros(lattice.n_z, lattice.k)).collect();
        FiberedField { lattice, fibers }
    }

    pub fn from_fibers(lattice: TruncationLattice, fibers: Vec<FiberVector>) -> Result<Self> {
        if fibers.len() != lattice.n_lambda {
            return Err(Error::LatticeMismatch(format!(
                "{} fibers for n_lambda = {}",
                fibers.len(),
                lattice.n_lambda
            )));
        }
        if let Some(bad) = fibers.iter().find(|f| f.n_z != lattice.n_z || f.k != lattice.k) {
            return Err(Error::LatticeMismatch(format!(
                "fiber shape ({}, {}) vs lattice ({}, {})",
                bad.n_z, bad.k, lattice.n_z, lattice.k
            )));
        }
        if fibers.iter().any(|f| f.coeffs.iter().any(|c| c.re.is_nan() || c.im.is_nan())) {
            return Err(Error::Numerical("NaN coefficient in field".into()));
        }
        Ok(FiberedField { lattice, fibers })
    }

    /// The field `λ ↦ v` for every grid point.
    pub fn constant(lattice: TruncationLattice, v: &FiberVector) -> Self {
        FiberedField { lattice, fibers: vec![v.clone(); lattice.n_lambda] }
    }

    pub fn from_fn(lattice: TruncationLattice, f: impl Fn(usize) -> FiberVector) -> Result<Self> {
        Self::from_fibers(lattice, (0..lattice.n_lambda).map(f).collect())
    }

    pub fn lattice(&self) -> &TruncationLattice {
        &self.lattice
    }

    pub fn fibers(&self) -> &[FiberVector] {
        &self.fibers
    }

    pub fn fiber(&self, m: usize) -> &FiberVector {
        &self.fibers[m]
    }

    pub fn into_fibers(self) -> Vec<FiberVector> {
        self.fibers
    }

    /// Discrete L² norm with the normalized measure: `(1/n) Σ_m ‖f(λ_m)‖²`.
    pub fn norm(&self) -> f64 {
        let total: f64 = self.fibers.iter().map(FiberVector::norm_sqr).sum();
        (total / self.lattice.n_lambda as f64).sqrt()
    }

    /// Discrete L² inner product.
    pub fn inner(&self, other: &FiberedField) -> c64 {
        let total: c64 = self.fibers.iter().zip(&other.fibers).map(|(a, b)| a.inner(b)).sum();
        total / self.lattice.n_lambda as f64
    }

    pub fn map(&self, f: impl Fn(usize, &FiberVector) -> FiberVector) -> FiberedField {
        let fibers = self.fibers.iter().enumerate().map(|(m, v)| f(m, v)).collect();
        FiberedField { lattice: self.lattice, fibers }
    }

    pub fn max_abs_diff(&self, other: &FiberedField) -> f64 {
        self.fibers
            .iter()
            .zip(&other.fibers)
            .flat_map(|(a, b)| a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

/// One monomial `c · λ^lambda_power · z^z_power · ε_coord`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaurentTerm {
    pub lambda_power: i64,
    pub z_power: usize,
    /// Zero-based coordinate of `K`.
    pub coord: usize,
    pub coeff: c64,
}

/// Exact symbolic trigonometric-polynomial field, used to specify generators.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaurentPolyField {
    pub terms: Vec<LaurentTerm>,
}

impl LaurentPolyField {
    pub fn new(terms: Vec<LaurentTerm>) -> Self {
        LaurentPolyField { terms }
    }

    pub fn term(mut self, lambda_power: i64, z_power: usize, coord: usize, coeff: c64) -> Self {
        self.terms.push(LaurentTerm { lambda_power, z_power, coord, coeff });
        self
    }

    /// Highest z-power among the terms.
    pub fn z_degree(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.z_power).max()
    }

    /// Multiplication by `z^shift`.
    pub fn shifted(&self, shift: usize) -> LaurentPolyField {
        LaurentPolyField {
            terms: self.terms.iter().map(|t| LaurentTerm { z_power: t.z_power + shift, ..*t }).collect(),
        }
    }

    pub fn check_bounds(&self, lat: &TruncationLattice) -> Result<()> {
        for (idx, t) in self.terms.iter().enumerate() {
            if t.z_power >= lat.n_z {
                return Err(Error::DegreeOverflow { term: idx, degree: t.z_power, max: lat.n_z - 1 });
            }
            if t.coord >= lat.k {
                return Err(Error::CoordinateOverflow { term: idx, coord: t.coord, k: lat.k });
            }
        }
        Ok(())
    }
}

/// Samples a trigonometric-polynomial field on the lattice grid.
pub fn eval_field(p: &LaurentPolyField, lat: &TruncationLattice) -> Result<FiberedField> {
    p.check_bounds(lat)?;
    let fibers = (0..lat.n_lambda)
        .map(|m| {
            let mut v = FiberVector::zeros(lat.n_z, lat.k);
            for t in &p.terms {
                let idx = lat.index(t.z_power, t.coord);
                v.coeffs[idx] += t.coeff * lat.lambda_pow(m, t.lambda_power);
            }
            v
        })
        .collect();
    Ok(FiberedField { lattice: *lat, fibers })
}
