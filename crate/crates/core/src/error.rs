use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid bit value {0} (expected 0 or 1)")]
    InvalidBit(u8),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("wrong metric kind: expected {expected}, got {actual}")]
    WrongMetricKind {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invalid CRC polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("shortened code bit at position {0} is nonzero")]
    ShortenedBitNonzero(usize),

    #[error("enumeration dimension {dim} exceeds budget of {budget}")]
    OverBudget { dim: usize, budget: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
