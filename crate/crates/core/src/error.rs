use thiserror::Error;

/// Errors raised by the algebra, factorization and finite-loop routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("moduli disagree: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    #[error("moduli are not pairwise coprime: {0} and {1}")]
    NotCoprime(String, String),
    #[error("tuple is not unimodular modulo {0}")]
    NotUnimodular(String),
    #[error("SL(2) matrix has determinant {0}, expected 1")]
    InvalidSL2(String),
    #[error("axis index {0} is not in 1..=3")]
    InvalidAxis(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("not in the principal congruence subloop: {0}")]
    NotInGamma(String),
    #[error("degenerate vector: {0}")]
    DegenerateV(String),
    #[error("modulus {0} exceeds the enumeration cap")]
    TooLarge(u64),
    #[error("{0} does not divide {1}")]
    NotDivisor(u64, u64),
    #[error("Lagrange property fails: {0}")]
    LagrangeFails(String),
    #[error("subloop belongs to a different parent loop")]
    ParentMismatch,
    #[error("construction failed self-check: {0}")]
    Internal(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
