use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MubError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("prime {p} is not congruent to {expected} mod 4")]
    WrongResidueClass { p: u64, expected: u64 },

    #[error("state is not normalized (norm {norm:.17e})")]
    NotNormalized { norm: f64 },

    #[error("seed vector is not unbiased to the Fourier basis (worst overlap defect {defect:.17e})")]
    NotFourierUnbiased { defect: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("constructed basis is not unbiased to the set built so far (defect {defect:.17e})")]
    NotUnbiased { defect: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("not unbiased: identical quadrature direction")]
    ParallelQuadratures,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MubError>;
