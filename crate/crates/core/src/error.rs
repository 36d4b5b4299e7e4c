use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is not a probability in [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("count k = {k} exceeds n = {n}")]
    CountOutOfRange { k: u64, n: u64 },

    #[error("doubled magnetization {doubled} has the wrong parity for N = {n}")]
    ParityMismatch { n: usize, doubled: i64 },

    #[error("doubled magnetization {doubled} is outside [-{n}, {n}]")]
    SectorOutOfRange { n: usize, doubled: i64 },

    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("entry {index} is negative or non-finite ({value})")]
    InvalidProbability { index: usize, value: f64 },

    #[error("dimension mismatch: expected N = {expected}, found N = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("measurement width must be a non-negative number, got {0}")]
    InvalidWidth(f64),

    #[error("kernel is not trace preserving: column {column} sums to {sum}")]
    NotTracePreserving { column: i64, sum: f64 },

    #[error("outcome {doubled} has zero probability; cannot condition on it")]
    ImpossibleOutcome { doubled: i64 },

    #[error("step {step} is out of range ({reason})")]
    StepOutOfRange { step: usize, reason: &'static str },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dense oracle supports N <= {max}, got N = {n}")]
    OracleTooLarge { n: usize, max: usize },
}
