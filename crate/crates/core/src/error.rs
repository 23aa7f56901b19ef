use thiserror::Error;

/// Errors raised by the construction and verification routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix is not nilpotent")]
    NotNilpotent,

    #[error("multiplicative order exceeds cap {cap}")]
    OrderExceedsCap { cap: u64 },

    #[error("matrix is not invertible")]
    Singular,

    #[error("not a root: {0}")]
    NotARoot(String),

    #[error("elements belong to different algebras")]
    AlgebraMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row {row}: root elements {first} and {second} do not commute")]
    NonCommutingSupport { row: String, first: String, second: String },

    #[error("relation failure: {0}")]
    RelationFailure(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("decomposition failure: {0}")]
    DecompositionFailure(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("element is not unipotent")]
    NotUnipotent,

    #[error("element is not an involution")]
    NotInvolution,

    #[error("cannot spin the zero vector")]
    ZeroVector,

    #[error("element is not toral: {0}")]
    NotToral(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
