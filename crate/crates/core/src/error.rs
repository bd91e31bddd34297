use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spin quantum number must be a nonnegative half-integer, got {0}")]
    InvalidSpin(f64),

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("hyperfine tensor must be symmetric")]
    AsymmetricTensor,

    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds {limit:.3e}")]
    NotHermitian { defect: f64, limit: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (relative off-diagonal residual {residual:.3e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("frequency grid must be non-empty and strictly increasing")]
    BadGrid,

    #[error("input list must be non-empty")]
    EmptyInput,

    #[error("rates must be nonnegative, got {0}")]
    NegativeRate(f64),

    #[error("populations must form a probability vector (sum 1, entries >= 0)")]
    BadPopulations,

    #[error("no addressable transitions")]
    NoAddressableTransitions,

    #[error("linear system is singular")]
    SingularMatrix,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("fit did not converge after {iterations} iterations (best rss {rss:.6e})")]
    FitNoConvergence { iterations: usize, rss: f64 },
}
