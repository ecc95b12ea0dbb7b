use thiserror::Error;

use crate::qmath::DensityMatrix;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("basis vectors are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("degenerate leading eigenvalues (gap {gap:e})")]
    Degenerate { gap: f64 },

    #[error("Kraus operators are not trace preserving (max deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("tomography design matrix is singular")]
    SingularDesign,

    #[error("maximum-likelihood fit did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
        best: Box<DensityMatrix>,
    },

    #[error("invalid channel specification: {0}")]
    InvalidSpec(String),

    #[error("subspace is empty")]
    EmptySubspace,

    #[error("{value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
