use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generator matrix must be square and non-empty (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("generator matrix has non-finite entries")]
    NonFinite,
    #[error("generator is singular (|det| = {det:e})")]
    SingularGenerator { det: f64 },
    #[error("dimension {dim} exceeds the exact-mode limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("vector length {got} does not match lattice dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coarse lattice is not contained in the fine lattice")]
    NotNested,
    #[error("integers {k1} and {k2} are not co-prime")]
    NotCoprime { k1: i64, k2: i64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("code generators are linearly dependent over F_{q}")]
    DependentGenerators { q: u64 },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("first code is not a subcode of the second")]
    NotSubcode,
    #[error("{k} is not invertible modulo {q}")]
    NonInvertible { k: i64, q: u64 },
    #[error("required window of {points:e} points exceeds the cap of {cap:e}")]
    WindowTooLarge { points: f64, cap: f64 },
    #[error("characteristic-function support is not strictly inside the dual Voronoi region")]
    SupportViolation,
    #[error("flatness factor {eps:e} is not below 1/(16e)")]
    EpsilonTooLarge { eps: f64 },
    #[error("group of order {m} is too small (need more than 4 elements)")]
    GroupTooSmall { m: usize },
    #[error("channel gains must be nonzero")]
    ZeroGain,
    #[error("channel gains were not reduced to co-prime integers")]
    NotReduced,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
