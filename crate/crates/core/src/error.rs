use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix has non-integer entries")]
    NonIntegerMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("residue classes are ambiguous: {0}")]
    AmbiguousResidues(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("digit set is empty")]
    EmptySet,
    #[error("enumeration needs {needed} elements, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("tower spectrum collision at level {level}")]
    Collision { level: usize },
    #[error("triple at level {0} is not verified")]
    UnverifiedTriple(usize),
    #[error("point outside the admissible domain: {0}")]
    OutOfDomain(String),
    #[error("schedule failure at k={k}: {constraint}")]
    ScheduleFailure { k: usize, constraint: String },
    #[error("stage {0} is not available in this sequence")]
    StageUnavailable(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
