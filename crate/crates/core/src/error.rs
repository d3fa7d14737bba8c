use thiserror::Error;

/// Errors shared across the spectral, solver, network and study layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside [0,1]^d: coordinate {axis} = {value}")]
    OutsideDomain { axis: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("right-hand side must have zero mean, got f\u{302}(0) = {mean}")]
    NonzeroMean { mean: f64 },

    #[error("potential is not uniformly positive: sampled minimum {min_found}")]
    PotentialNotPositive { min_found: f64 },

    #[error("linear system is ill-conditioned: estimate {estimate:.3e}")]
    IllConditioned { estimate: f64 },

    #[error("signed coefficient table is inconsistent at {index:?}: spread {spread:.3e}")]
    InconsistentSignTable { index: Vec<i64>, spread: f64 },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("training diverged at iteration {iter}: loss {loss:.3e}")]
    Diverged { iter: usize, loss: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
