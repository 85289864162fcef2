use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty data")]
    EmptyData,
    #[error("payload must be 128 bits")]
    PayloadLength,
    #[error("frame must be 158 bits")]
    FrameLength,
    #[error("degenerate LFSR state")]
    DegenerateLfsr,
    #[error("invalid scrambler polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("NaN LLR at index {0}")]
    NanLlr(usize),
    #[error("degenerate peak levels")]
    DegeneratePeaks,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}
