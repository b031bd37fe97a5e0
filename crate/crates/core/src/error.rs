use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("extension degree n = {0} is too small (n >= 2 required)")]
    DegreeTooSmall(u32),
    #[error("subfield degree s must be at least 1")]
    ZeroSubfieldDegree,
    #[error("modulus has degree {got}, expected {expected}")]
    WrongModulusDegree { expected: usize, got: usize },
    #[error("modulus is reducible over the prime field")]
    ReducibleModulus,
    #[error("field of order {p}^{degree} exceeds the supported size")]
    FieldTooLarge { p: u32, degree: u32 },
    #[error("zero has no {0}")]
    ZeroElement(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("objects belong to different field towers")]
    TowerMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("the F_q-subspace does not span the ambient space over F_q^n")]
    Degenerate,
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("outside the family: {0}")]
    OutsideFamily(String),
    #[error("incomplete weight profile: {0}")]
    IncompleteProfile(String),
    #[error("minimum distance is not exact")]
    InexactDistance,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("checkpoint does not belong to this job")]
    CheckpointMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
