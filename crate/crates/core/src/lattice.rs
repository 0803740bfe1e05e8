use std::f64::consts::PI;

use faer::c64;

use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;
pub const DEFAULT_ORTH_TOL: f64 = 1e-8;
pub const DEFAULT_INNER_TOL: f64 = 1e-6;

/// Discretization of the circle and of the Hardy space with multiplicity.
///
/// The circle variable is sampled at the `n_lambda` roots of unity
/// `exp(2πi m / n_lambda)`; each fiber keeps the z-Fourier degrees
/// `0..n_z` of a `k`-dimensional coefficient space, so every fiber lives in
/// `C^(n_z * k)` with coefficient `(j, i)` stored at index `j * k + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationLattice {
    pub n_lambda: usize,
    pub n_z: usize,
    pub k: usize,
    /// Relative singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Residual tolerance for membership and orthogonality checks.
    pub orth_tol: f64,
}

impl TruncationLattice {
    pub fn new(n_lambda: usize, n_z: usize, k: usize) -> Result<Self> {
        Self::with_tolerances(n_lambda, n_z, k, DEFAULT_RANK_TOL, DEFAULT_ORTH_TOL)
    }

    pub fn with_tolerances(
        n_lambda: usize,
        n_z: usize,
        k: usize,
        rank_tol: f64,
        orth_tol: f64,
    ) -> Result<Self> {
        let lat = TruncationLattice { n_lambda, n_z, k, rank_tol, orth_tol };
        lat.validate()?;
        Ok(lat)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lambda == 0 || self.n_z == 0 || self.k == 0 {
            return Err(Error::InvalidLattice(format!(
                "n_lambda, n_z and k must be positive (got {}, {}, {})",
                self.n_lambda, self.n_z, self.k
            )));
        }
        for (name, v) in [("rank_tol", self.rank_tol), ("orth_tol", self.orth_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidLattice(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    /// Dimension of one fiber, `n_z * k`.
    #[inline]
    pub fn ambient(&self) -> usize {
        self.n_z * self.k
    }

    /// Flat index of coefficient `(j, i)`.
    #[inline]
    pub fn index(&self, j: usize, i: usize) -> usize {
        j * self.k + i
    }

    /// Grid point `λ_m` raised to `power`.
    ///
    /// The exponent is reduced modulo `n_lambda` in integer arithmetic and
    /// quarter turns are returned exactly, so indicator-style trigonometric
    /// polynomials vanish exactly where they should.
    pub fn lambda_pow(&self, m: usize, power: i64) -> c64 {
        let n = self.n_lambda as i64;
        let r = ((m as i64 % n) * (power.rem_euclid(n))).rem_euclid(n);
        if (4 * r) % n == 0 {
            return match (4 * r) / n {
                0 => c64::new(1.0, 0.0),
                1 => c64::new(0.0, 1.0),
                2 => c64::new(-1.0, 0.0),
                _ => c64::new(0.0, -1.0),
            };
        }
        let theta = 2.0 * PI * r as f64 / n as f64;
        c64::new(theta.cos(), theta.sin())
    }

    /// Grid point `λ_m`.
    pub fn lambda(&self, m: usize) -> c64 {
        self.lambda_pow(m, 1)
    }

    /// Same shape (n_lambda, n_z, k); tolerances may differ.
    pub fn same_shape(&self, other: &TruncationLattice) -> bool {
        self.n_lambda == other.n_lambda && self.n_z == other.n_z && self.k == other.k
    }

    pub(crate) fn check_shape(&self, other: &TruncationLattice) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch(format!(
                "({}, {}, {}) vs ({}, {}, {})",
                self.n_lambda, self.n_z, self.k, other.n_lambda, other.n_z, other.k
            )))
        }
    }
}
