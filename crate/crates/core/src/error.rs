use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuasiError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("element outside the required domain: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("element is not self-adjoint (defect {defect:.3e})")]
    NotSelfAdjoint { defect: f64 },

    #[error("model inconsistency: {0}")]
    Inconsistent(String),

    #[error("matrix is numerically singular (σ_min = {smallest:.3e}, σ_max = {largest:.3e})")]
    Singular { smallest: f64, largest: f64 },

    #[error("graph limit is not single-valued: {0}")]
    NotClosable(String),

    #[error("no convergence after n = {n}: last increment {increment:.3e} > tol {tol:.3e}")]
    Convergence { n: u64, increment: f64, tol: f64 },

    #[error("spectral hypothesis violated at λ = {lambda}: {detail}")]
    SpectralHypothesis { lambda: f64, detail: String },

    #[error("size {requested} exceeds cap {cap}")]
    Size { requested: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, QuasiError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(QuasiError::Dimension { expected, got })
    }
}
