use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not invertible (|det| = {0})")]
    NotInvertible(f64),
    #[error("matrix is not expanding: no power p <= {0} of the inverse has infinity norm < 1")]
    NotExpanding(u32),
    #[error("digit set does not contain the zero vector")]
    MissingZeroDigit,
    #[error("digit {0} appears more than once")]
    DuplicateDigit(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("expansion budget exceeded: mass {mass} > cap {cap}")]
    BudgetExceeded { mass: u128, cap: u64 },
    #[error("point has multiplicity {0} at the requested level, not a collision")]
    NotACollision(u64),
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("dimension {0} is not supported by this operation")]
    UnsupportedDimension(usize),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("coefficient r_{index} = {value} is not 0 or d")]
    InvalidCoefficient { index: usize, value: f64 },
    #[error("invalid two-digit Cantor pair: {0}")]
    InvalidCantorPair(String),
    #[error("resolution {0} is below the minimum of 16")]
    ResolutionTooSmall(usize),
    #[error("pair is not a tile candidate (card(D) != |det B|) or has zero measure")]
    NotATileCandidate,
    #[error("lower density profile has no entries")]
    NoTrustedLowerEntry,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    InvalidArgument(String),
}
