use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported local dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("state of {dim}^{parties} amplitudes exceeds the dense limit of {limit}")]
    StateTooLarge {
        dim: usize,
        parties: usize,
        limit: usize,
    },
    #[error("gate is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: gate acts on {gate}, state on {state}")]
    DimensionMismatch { gate: usize, state: usize },
    #[error("party index {index} out of range 1..={parties}")]
    PartyOutOfRange { index: usize, parties: usize },
    #[error("inadmissible input: {0}")]
    Inadmissible(String),
    #[error("no cube-root branch satisfies the class-rotation check")]
    NoValidBranch,
    #[error("lemma verification failed: {0}")]
    VerificationFailed(String),
    #[error("enumeration of {parties} parties exceeds the exhaustive limit {limit}")]
    EnumerationBound { parties: usize, limit: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
