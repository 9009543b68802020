use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("dense backend limited to n <= {cap} qubits (got {n}); use the Chebyshev backend")]
    DenseCapExceeded { n: usize, cap: usize },
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    #[error("Chebyshev expansion did not converge: {0}")]
    NoConvergence(String),
    #[error("realization {realization} failed at t = {time}: {source}")]
    Realization {
        realization: u64,
        time: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("analysis: {0}")]
    Analysis(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
