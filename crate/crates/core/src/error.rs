use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid subsystem layout: {0}")]
    InvalidLayout(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid subsystem indices {indices:?} for a layout with {count} subsystems")]
    InvalidIndices { indices: Vec<usize>, count: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("dimension {dim} not supported: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operation requires a finite ensemble")]
    InfiniteEnsemble,
}

pub type Result<T> = std::result::Result<T, LabError>;
