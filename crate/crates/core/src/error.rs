use thiserror::Error;

use crate::poly::Exponent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed instance: {0}")]
    Malformed(String),

    #[error("zero coefficient at exponent {0}")]
    ZeroCoefficient(Exponent),

    #[error("dimension mismatch: expected {expected} entries, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("duplicate exponent {0}")]
    DuplicateExponent(Exponent),

    #[error("exponent entry {0} exceeds the supported degree range")]
    DegreeOverflow(u64),

    #[error("invalid bounds for variable {var}: [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },

    #[error("undefined degree of the zero polynomial")]
    UndefinedDegree,

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("no cover available for inner term {0}")]
    CoverUnavailable(Exponent),

    #[error("certificate repair failed: {0}")]
    RepairFailure(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
