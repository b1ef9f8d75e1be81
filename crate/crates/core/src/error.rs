use thiserror::Error;

use crate::matrix::Matrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("invalid field descriptor: {0}")]
    InvalidField(String),
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("hom table has no entry for {0}")]
    ProbeMiss(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("conjugator is singular")]
    SingularConjugator,
    #[error("not a system of matrix units: {0}")]
    NotMatrixUnits(String),
    #[error("assembled conjugator is singular")]
    SingularRecovery,
    #[error("idempotents do not commute or absorb: {0}")]
    NotCommutingIdempotents(String),
    #[error("matrix is not in SL(n): determinant is {0}")]
    NotSpecialLinear(String),
    #[error("hom is not in the registered family: {0}")]
    UnregisteredHom(String),
    #[error("trivial-det atom must be the last applied atom")]
    TrivialNotOutermost,
    #[error("map is not multiplicative: {0}")]
    NotMultiplicative(String),
    #[error("trivial map images do not diagonalize over the field: {0}")]
    NonDiagonalizableTrivial(String),
    #[error("rank ladder violated: {0}")]
    RankLadderViolation(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("oracle call budget of {0} evaluations exceeded")]
    BudgetExceeded(usize),
    #[error("reconstructed map disagrees with the oracle")]
    VerificationFailed { counterexample: Box<Matrix> },
    #[error("malformed document: {0}")]
    Document(String),
}
