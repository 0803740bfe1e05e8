use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the fibered operations.
///
/// Fiber-local failures carry the grid index `fiber` of the first offending
/// fiber (lowest index wins, independent of scheduling).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("term {term}: z-degree {degree} exceeds n_z - 1 = {max}")]
    DegreeOverflow { term: usize, degree: usize, max: usize },

    #[error("term {term}: coordinate {coord} outside 0..{k}")]
    CoordinateOverflow { term: usize, coord: usize, k: usize },

    #[error("empty generator set")]
    EmptyGenerators,

    #[error(
        "fiber {fiber}: singular value {value:.3e} inside the guard band around cutoff {cutoff:.3e}; adjust rank_tol"
    )]
    ToleranceAmbiguity { fiber: usize, value: f64, cutoff: f64 },

    #[error("fiber {fiber}: summands {first} and {second} overlap (max cross inner product {overlap:.3e})")]
    NotOrthogonal { fiber: usize, first: usize, second: usize, overlap: f64 },

    #[error("fiber {fiber}: range function is not invariant under S (leak {leak:.3e})")]
    NotInvariant { fiber: usize, leak: f64 },

    #[error("fiber {fiber}: rank {rank} exceeds dim K = {k}")]
    RankTooLarge { fiber: usize, rank: usize, k: usize },

    #[error("depth {depth} exceeds the reliable band (at most {max_depth})")]
    BandExceeded { depth: usize, max_depth: usize },

    #[error("fiber {fiber}: recovered base has higher z-degree content {residual:.3e}")]
    BaseNotConstant { fiber: usize, residual: f64 },

    #[error("fiber {fiber}: images of the two decompositions differ (distance {distance:.3e})")]
    ImagesDiffer { fiber: usize, distance: f64 },

    #[error("fiber {fiber}: singular value {value:.6} is neither 0 nor 1")]
    NotPartialIsometry { fiber: usize, value: f64 },

    #[error("fiber {fiber}: operator does not commute with S (defect {defect:.3e})")]
    NotCommuting { fiber: usize, defect: f64 },

    #[error("wandering subspace has numerical rank {rank}, expected 1")]
    WanderingRankNotOne { rank: usize },

    #[error("fiber {fiber}: inner defect {defect:.3e} exceeds tolerance")]
    NotInner { fiber: usize, defect: f64 },

    #[error("ranges differ: {0}")]
    RangesDiffer(String),

    #[error("fiber {fiber}: |c| = {modulus:.9} is not unimodular")]
    NotUnimodular { fiber: usize, modulus: f64 },

    #[error("fiber {fiber}: quotient identity residual {residual:.3e}")]
    QuotientResidual { fiber: usize, residual: f64 },

    #[error("linear algebra failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Grid index the error refers to, when it is fiber-local.
    pub fn fiber(&self) -> Option<usize> {
        match *self {
            Error::ToleranceAmbiguity { fiber, .. }
            | Error::NotOrthogonal { fiber, .. }
            | Error::NotInvariant { fiber, .. }
            | Error::RankTooLarge { fiber, .. }
            | Error::BaseNotConstant { fiber, .. }
            | Error::ImagesDiffer { fiber, .. }
            | Error::NotPartialIsometry { fiber, .. }
            | Error::NotCommuting { fiber, .. }
            | Error::NotInner { fiber, .. }
            | Error::NotUnimodular { fiber, .. }
            | Error::QuotientResidual { fiber, .. } => Some(fiber),
            _ => None,
        }
    }

    /// Short stable name, used by reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidLattice(_) => "InvalidLattice",
            Error::LatticeMismatch(_) => "LatticeMismatch",
            Error::DegreeOverflow { .. } => "DegreeOverflow",
            Error::CoordinateOverflow { .. } => "CoordinateOverflow",
            Error::EmptyGenerators => "EmptyGenerators",
            Error::ToleranceAmbiguity { .. } => "ToleranceAmbiguity",
            Error::NotOrthogonal { .. } => "NotOrthogonal",
            Error::NotInvariant { .. } => "NotInvariant",
            Error::RankTooLarge { .. } => "RankTooLarge",
            Error::BandExceeded { .. } => "BandExceeded",
            Error::BaseNotConstant { .. } => "BaseNotConstant",
            Error::ImagesDiffer { .. } => "ImagesDiffer",
            Error::NotPartialIsometry { .. } => "NotPartialIsometry",
            Error::NotCommuting { .. } => "NotCommuting",
            Error::WanderingRankNotOne { .. } => "WanderingRankNotOne",
            Error::NotInner { .. } => "NotInner",
            Error::RangesDiffer(_) => "RangesDiffer",
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::QuotientResidual { .. } => "QuotientResidual",
            Error::Numerical(_) => "Numerical",
        }
    }
}

/// Collects per-fiber results in index order, returning the first error.
pub(crate) fn collect_fibers<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}
