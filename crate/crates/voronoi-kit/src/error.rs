use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid divisibility chain: {0}")]
    InvalidChain(String),
    #[error("residue {residue} is not invertible modulo {modulus}")]
    NotInvertible { residue: i64, modulus: i64 },
    #[error("prime {p} divides the modulus {modulus}")]
    RamifiedPrime { p: u64, modulus: u64 },
    #[error("missing root number for {0}")]
    MissingRootNumber(String),
    #[error("coefficient unavailable: {0}")]
    MissingCoefficient(String),
    #[error("series expansion failed: {0}")]
    Expansion(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
