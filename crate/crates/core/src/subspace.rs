use faer::{c64, Mat, MatRef};
use rayon::prelude::*;

use crate::error::{collect_fibers, Error, Result};
use crate::field::FiberVector;
use crate::lattice::TruncationLattice;
use crate::linalg;

/// Runs `f` on every fiber index in parallel; results come back in index
/// order and the lowest-index error wins.
pub(crate) fn par_fibers<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    collect_fibers((0..n).into_par_iter().map(f).collect())
}

/// A subspace of one fiber, held as a matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSubspace {
    frame: Mat<c64>,
}

impl FiberSubspace {
    /// Wraps a frame, checking orthonormality to within `tol`.
    pub fn from_frame(frame: Mat<c64>, tol: f64) -> Result<Self> {
        let defect = linalg::orthonormality_defect(frame.as_ref());
        if defect > tol {
            return Err(Error::Numerical(format!("frame is not orthonormal (defect {defect:.3e})")));
        }
        Ok(FiberSubspace { frame })
    }

    pub(crate) fn new_unchecked(frame: Mat<c64>) -> Self {
        FiberSubspace { frame }
    }

    /// Orthonormal basis of the span of `vectors` (any spanning set).
    pub fn span_of(vectors: MatRef<'_, c64>, rank_tol: f64, cluster_tol: f64) -> Result<Self> {
        let scale = linalg::fro(vectors);
        let rule = linalg::RankRule { rank_tol, zero_floor: linalg::ZERO_REL * scale, cluster_tol };
        Ok(FiberSubspace { frame: linalg::column_span(vectors, &rule, 0)? })
    }

    pub fn zero(ambient: usize) -> Self {
        FiberSubspace { frame: linalg::empty(ambient) }
    }

    pub fn full(ambient: usize) -> Self {
        FiberSubspace { frame: Mat::identity(ambient, ambient) }
    }

    /// Span of the given coordinate axes.
    pub fn coordinates(ambient: usize, axes: &[usize]) -> Self {
        let frame = Mat::from_fn(ambient, axes.len(), |r, c| {
            if r == axes[c] {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        FiberSubspace { frame }
    }

    pub fn frame(&self) -> MatRef<'_, c64> {
        self.frame.as_ref()
    }

    pub fn into_frame(self) -> Mat<c64> {
        self.frame
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.frame.nrows()
    }

    /// Column `c` of the frame as a flat coefficient vector.
    pub fn column(&self, c: usize) -> Vec<c64> {
        (0..self.ambient()).map(|r| self.frame[(r, c)]).collect()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &[c64]) -> Vec<c64> {
        let mut out = vec![c64::new(0.0, 0.0); v.len()];
        for c in 0..self.rank() {
            let coef: c64 = (0..v.len()).map(|r| self.frame[(r, c)].conj() * v[r]).sum();
            for (r, o) in out.iter_mut().enumerate() {
                *o += coef * self.frame[(r, c)];
            }
        }
        out
    }

    /// `‖v - P v‖`.
    pub fn residual_norm(&self, v: &[c64]) -> f64 {
        let p = self.project(v);
        v.iter().zip(&p).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Dense projector `Q Qᴴ`.
    pub fn projector(&self) -> Mat<c64> {
        if self.rank() == 0 {
            return Mat::zeros(self.ambient(), self.ambient());
        }
        &self.frame * self.frame.adjoint()
    }

    /// Sine of the largest principal angle; 1 when ranks differ.
    pub fn distance(&self, other: &FiberSubspace) -> Result<f64> {
        linalg::subspace_distance(self.frame(), other.frame())
    }

    pub fn orthonormality_defect(&self) -> f64 {
        linalg::orthonormality_defect(self.frame())
    }

    pub fn complement(&self) -> FiberSubspace {
        FiberSubspace { frame: linalg::complement(self.frame()) }
    }
}

/// A range function in the truncated `H²_K`: one subspace of `C^(n_z k)` per
/// grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeFunction {
    lattice: TruncationLattice,
    fibers: Vec<FiberSubspace>,
}

/// A range function in `K = C^k` (the base of a full-Hardy space).
#[derive(Debug, Clone, PartialEq)]
pub struct BaseRange {
    lattice: TruncationLattice,
    fibers: Vec<FiberSubspace>,
}

macro_rules! range_common {
    ($ty:ident, $ambient:expr) => {
        impl $ty {
            pub fn from_fibers(lattice: TruncationLattice, fibers: Vec<FiberSubspace>) -> Result<Self> {
                let ambient: fn(&TruncationLattice) -> usize = $ambient;
                if fibers.len() != lattice.n_lambda {
                    return Err(Error::LatticeMismatch(format!(
                        "{} fibers for n_lambda = {}",
                        fibers.len(),
                        lattice.n_lambda
                    )));
                }
                if let Some(bad) = fibers.iter().find(|f| f.ambient() != ambient(&lattice)) {
                    return Err(Error::LatticeMismatch(format!(
                        "fiber ambient {} vs expected {}",
                        bad.ambient(),
                        ambient(&lattice)
                    )));
                }
                Ok($ty { lattice, fibers })
            }

            pub fn zero(lattice: TruncationLattice) -> Self {
                let ambient: fn(&TruncationLattice) -> usize = $ambient;
                let d = ambient(&lattice);
                $ty { lattice, fibers: (0..lattice.n_lambda).map(|_| FiberSubspace::zero(d)).collect() }
            }

            pub fn full(lattice: TruncationLattice) -> Self {
                let ambient: fn(&TruncationLattice) -> usize = $ambient;
                let d = ambient(&lattice);
                $ty { lattice, fibers: (0..lattice.n_lambda).map(|_| FiberSubspace::full(d)).collect() }
            }

            /// The same subspace at every grid point.
            pub fn constant(lattice: TruncationLattice, fiber: &FiberSubspace) -> Result<Self> {
                Self::from_fibers(lattice, vec![fiber.clone(); lattice.n_lambda])
            }

            pub fn lattice(&self) -> &TruncationLattice {
                &self.lattice
            }

            pub fn fibers(&self) -> &[FiberSubspace] {
                &self.fibers
            }

            pub fn fiber(&self, m: usize) -> &FiberSubspace {
                &self.fibers[m]
            }

            pub fn ranks(&self) -> Vec<usize> {
                self.fibers.iter().map(FiberSubspace::rank).collect()
            }

            /// Largest per-fiber subspace distance.
            pub fn distance(&self, other: &$ty) -> Result<f64> {
                self.lattice.check_shape(&other.lattice)?;
                let d = par_fibers(self.fibers.len(), |m| self.fibers[m].distance(&other.fibers[m]))?;
                Ok(d.into_iter().fold(0.0, f64::max))
            }

            /// Largest `‖Qᴴ Q - I‖_max` over the fibers.
            pub fn orthonormality_defect(&self) -> f64 {
                self.fibers.iter().map(FiberSubspace::orthonormality_defect).fold(0.0, f64::max)
            }
        }
    };
}

range_common!(RangeFunction, |lat| lat.ambient());
range_common!(BaseRange, |lat| lat.k);

impl BaseRange {
    /// `K_n = span{ε_1, …, ε_n}` with `n = dims[m]` at fiber `m`.
    pub fn leading_coordinates(lattice: TruncationLattice, dims: &[usize]) -> Result<Self> {
        if dims.len() != lattice.n_lambda {
            return Err(Error::LatticeMismatch("dimension list length".into()));
        }
        if let Some((m, &n)) = dims.iter().enumerate().find(|(_, &n)| n > lattice.k) {
            return Err(Error::RankTooLarge { fiber: m, rank: n, k: lattice.k });
        }
        let fibers = dims
            .iter()
            .map(|&n| FiberSubspace::coordinates(lattice.k, &(0..n).collect::<Vec<_>>()))
            .collect();
        Ok(BaseRange { lattice, fibers })
    }
}

impl RangeFunction {
    /// Projects `v` onto fiber `m`.
    pub fn project(&self, m: usize, v: &FiberVector) -> FiberVector {
        FiberVector::from_coeffs(self.lattice.n_z, self.lattice.k, self.fibers[m].project(v.coeffs()))
    }
}
