use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("unsupported qubit count {0} (Pauli strings are limited to 1..=63 qubits)")]
    UnsupportedQubitCount(usize),

    #[error("the identity string cannot be used as a generator")]
    IdentityGenerator,

    #[error("generator list is empty")]
    EmptyGenerators,

    #[error("generator {slot} has terms that do not mutually commute; split it into separate generators")]
    NonCommutingGenerator { slot: usize },

    #[error("expected {expected} parameters, found {found}")]
    ParamCount { expected: usize, found: usize },

    #[error("parameter index {index} out of range for {count} parameters")]
    ParamIndex { index: usize, count: usize },

    #[error("non-finite parameter or value: {0}")]
    NonFinite(String),

    #[error("size guard exceeded: n = {n} is above the limit of {max} qubits for this operation")]
    SizeGuard { n: usize, max: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("invalid symmetry sector: {0}")]
    Sector(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rank bound violated: {0}")]
    BoundViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
