use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigenvalue computation did not converge")]
    EigenFailure,

    #[error("not exponentially stable; apply finalize_shift first (nu1 = {nu1})")]
    NotStable { nu1: f64 },

    #[error("I - S(omega) is numerically singular (spectral radius {rho})")]
    SingularPeriodMap { rho: f64 },

    #[error("invalid lower solution: worst violation {worst} below -{tol}")]
    InvalidLowerSolution { worst: f64, tol: f64 },

    #[error("invalid upper solution: worst violation {worst} below -{tol}")]
    InvalidUpperSolution { worst: f64, tol: f64 },

    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },

    #[error("derived C undefined: C1 = 0 with C3 > 0")]
    DerivedCUndefined,

    #[error("time-stepping oracle diverged: |u| reached {norm} (cap {cap})")]
    OracleDiverged { norm: f64, cap: f64 },

    #[error("{0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
