pub mod beurling;
pub mod error;
pub mod factorization;
pub mod field;
pub mod fixtures;
pub mod full_hardy;
pub mod lattice;
mod linalg;
pub mod opfield;
pub mod range;
pub mod shift;
pub mod subspace;
pub mod wandering;

pub use faer::{c64, Mat, MatRef};

pub use beurling::{InnerField, ScalarH2};
pub use error::{Error, Result};
pub use factorization::{DecompositionResult, Diagnostics};
pub use field::{FiberVector, FiberedField, LaurentPolyField, LaurentTerm};
pub use lattice::TruncationLattice;
pub use opfield::OperatorField;
pub use subspace::{BaseRange, FiberSubspace, RangeFunction};
pub use wandering::{DimensionPartition, FrameFields};
