//! Operator fields: one linear map on the fiber per grid point.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::field::{FiberVector, FiberedField};
use crate::lattice::TruncationLattice;
use crate::linalg::{self, RankRule};
use crate::subspace::{par_fibers, FiberSubspace, RangeFunction};

/// `λ ↦ F(λ)`, each `F(λ_m)` an `(n_z k) × (n_z k)` matrix.
///
/// Every operator field commutes with `U` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorField {
    lattice: TruncationLattice,
    ops: Vec<Mat<c64>>,
}

impl OperatorField {
    pub fn from_ops(lattice: TruncationLattice, ops: Vec<Mat<c64>>) -> Result<Self> {
        if ops.len() != lattice.n_lambda {
            return Err(Error::LatticeMismatch(format!(
                "{} operators for n_lambda = {}",
                ops.len(),
                lattice.n_lambda
            )));
        }
        let d = lattice.ambient();
        if let Some(bad) = ops.iter().find(|o| o.nrows() != d || o.ncols() != d) {
            return Err(Error::LatticeMismatch(format!("operator {}x{} vs ambient {d}", bad.nrows(), bad.ncols())));
        }
        Ok(OperatorField { lattice, ops })
    }

    pub fn from_fn(lattice: TruncationLattice, f: impl Fn(usize) -> Mat<c64>) -> Result<Self> {
        Self::from_ops(lattice, (0..lattice.n_lambda).map(f).collect())
    }

    pub fn identity(lattice: TruncationLattice) -> Self {
        let d = lattice.ambient();
        OperatorField { lattice, ops: vec![Mat::identity(d, d); lattice.n_lambda] }
    }

    pub fn zero(lattice: TruncationLattice) -> Self {
        let d = lattice.ambient();
        OperatorField { lattice, ops: vec![Mat::zeros(d, d); lattice.n_lambda] }
    }

    /// The truncated unilateral shift `S` on every fiber.
    pub fn shift(lattice: TruncationLattice) -> Self {
        let (d, k) = (lattice.ambient(), lattice.k);
        let s = Mat::from_fn(d, d, |r, c| if r == c + k { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        OperatorField { lattice, ops: vec![s; lattice.n_lambda] }
    }

    /// Multiplication by the scalar `s(m)` on fiber `m`.
    pub fn scalar(lattice: TruncationLattice, s: impl Fn(usize) -> c64) -> Self {
        let d = lattice.ambient();
        let ops = (0..lattice.n_lambda)
            .map(|m| {
                let v = s(m);
                Mat::from_fn(d, d, |r, c| if r == c { v } else { c64::new(0.0, 0.0) })
            })
            .collect();
        OperatorField { lattice, ops }
    }

    /// `I_{n_z} ⊗ G(λ_m)`: the constant-in-z multiplier with symbol `G`, a
    /// `k × k` matrix per fiber. Such fields commute with `S` exactly.
    pub fn block_lift(lattice: TruncationLattice, symbols: &[Mat<c64>]) -> Result<Self> {
        let k = lattice.k;
        if symbols.len() != lattice.n_lambda || symbols.iter().any(|g| g.nrows() != k || g.ncols() != k) {
            return Err(Error::LatticeMismatch("block symbols must be n_lambda matrices of size k x k".into()));
        }
        let ops = symbols.iter().map(|g| block_diag(g.as_ref(), lattice.n_z)).collect();
        Ok(OperatorField { lattice, ops })
    }

    pub fn lattice(&self) -> &TruncationLattice {
        &self.lattice
    }

    pub fn ops(&self) -> &[Mat<c64>] {
        &self.ops
    }

    pub fn op(&self, m: usize) -> MatRef<'_, c64> {
        self.ops[m].as_ref()
    }

    pub fn op_mut(&mut self, m: usize) -> &mut Mat<c64> {
        &mut self.ops[m]
    }

    pub fn into_ops(self) -> Vec<Mat<c64>> {
        self.ops
    }

    /// `‖F‖_∞ = max_m ‖F(λ_m)‖`.
    pub fn sup_norm(&self) -> Result<f64> {
        let norms = par_fibers(self.ops.len(), |m| linalg::op_norm(self.ops[m].as_ref()))?;
        Ok(norms.into_iter().fold(0.0, f64::max))
    }

    /// Fiberwise product `self · other`.
    pub fn compose(&self, other: &OperatorField) -> Result<OperatorField> {
        self.lattice.check_shape(&other.lattice)?;
        let ops = par_fibers(self.ops.len(), |m| Ok(&self.ops[m] * &other.ops[m]))?;
        Ok(OperatorField { lattice: self.lattice, ops })
    }

    /// Fiberwise adjoint.
    pub fn adjoint(&self) -> OperatorField {
        OperatorField { lattice: self.lattice, ops: self.ops.iter().map(|o| o.adjoint().to_owned()).collect() }
    }
}

/// `I_n ⊗ g` for a square `g`.
pub(crate) fn block_diag(g: MatRef<'_, c64>, n: usize) -> Mat<c64> {
    let k = g.nrows();
    Mat::from_fn(n * k, n * k, |r, c| if r / k == c / k { g[(r % k, c % k)] } else { c64::new(0.0, 0.0) })
}

/// `(F̂ f)(λ_m) = F(λ_m) f(λ_m)`.
pub fn apply_opfield(op: &OperatorField, f: &FiberedField) -> Result<FiberedField> {
    op.lattice.check_shape(f.lattice())?;
    let lat = op.lattice;
    let fibers = par_fibers(lat.n_lambda, |m| {
        let a = op.op(m);
        let v = f.fiber(m).coeffs();
        let out = (0..a.nrows()).map(|r| (0..a.ncols()).map(|c| a[(r, c)] * v[c]).sum()).collect();
        Ok(FiberVector::from_coeffs(lat.n_z, lat.k, out))
    })?;
    FiberedField::from_fibers(lat, fibers)
}

/// Fiberwise image `F(λ)(J(λ))` and kernel `ker F(λ)`.
pub fn image_and_kernel_ranges(op: &OperatorField, range: &RangeFunction) -> Result<(RangeFunction, RangeFunction)> {
    op.lattice.check_shape(range.lattice())?;
    let lat = op.lattice;
    let images: Vec<Mat<c64>> = par_fibers(lat.n_lambda, |m| Ok(op.op(m) * range.fiber(m).frame()))?;
    let image = crate::range::range_of_stacks(&lat, &images)?;
    let scale = op.ops.iter().map(|o| linalg::fro(o.as_ref())).fold(0.0, f64::max);
    let rule = RankRule { rank_tol: lat.rank_tol, zero_floor: linalg::ZERO_REL * scale, cluster_tol: lat.orth_tol };
    let kernels = par_fibers(lat.n_lambda, |m| {
        let z = linalg::null_space(op.op(m), &rule, m)?;
        Ok(FiberSubspace::new_unchecked(linalg::canonical_basis(z.as_ref())))
    })?;
    Ok((image, RangeFunction::from_fibers(lat, kernels)?))
}
