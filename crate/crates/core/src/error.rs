use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh size N = {0}, need N >= 1")]
    InvalidMeshSize(usize),

    #[error("degenerate triangle {0} (area {1:e})")]
    DegenerateElement(usize, f64),

    #[error("inconsistent boundary specification: {0}")]
    InconsistentBoundary(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported quadrature degree {0}, supported degrees are 1..=12")]
    UnsupportedQuadrature(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular velocity mass block on triangle {0}")]
    SingularVelocityBlock(usize),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("Krylov breakdown at iteration {0}")]
    Breakdown(usize),

    #[error("indefinite operator in CG at iteration {iteration} (p'Ap = {curvature:e})")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("system of size {size} exceeds the dense probe cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("sweep finished with unconverged cells: {0}")]
    NotConvergedSweep(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
