use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid party index {index} for a {parties}-party layout")]
    InvalidParty { index: usize, parties: usize },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} differs from one")]
    TraceNotOne(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("mixed vector and matrix operands")]
    MixedOperands,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, QError>;
