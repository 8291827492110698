use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("oracle out of range: {0}")]
    OracleOutOfRange(String),
    #[error("level {0} is not square-free")]
    NotSquareFree(u64),
    #[error("not coprime: {0}")]
    NotCoprime(String),
    #[error("prime {p} {rel} the level {level}")]
    PrimeLevel { p: u64, level: u64, rel: &'static str },
    #[error("character of pair undefined on zero series")]
    ZeroSeries,
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error("eigenvalue tie during diagonalization: {0}")]
    EigenvalueTie(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
