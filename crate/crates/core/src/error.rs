use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field parameter {0}: expected a positive squarefree integer")]
    InvalidField(i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("zero ideal is not allowed here")]
    ZeroIdeal,
    #[error("{0} is not integral")]
    NotIntegral(String),
    #[error("{0} is not principal")]
    NotPrincipal(String),
    #[error("ideals {0} and {1} are not coprime")]
    NotCoprime(String, String),
    #[error("objects live over different fields")]
    FieldMismatch,
    #[error("invalid modular point: {0}")]
    InvalidPoint(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("{0}")]
    Precondition(String),
    #[error("value for {0} is outside the stored bound")]
    OutOfBound(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("document error: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
