use eqscope_conic::{ConicError, SolveStatus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CournotError {
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("solver returned {status:?}: {diagnostic}")]
    Solver { status: SolveStatus, diagnostic: String },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
}

impl CournotError {
    pub fn solver(status: SolveStatus, diagnostic: Option<String>) -> Self {
        CournotError::Solver { status, diagnostic: diagnostic.unwrap_or_default() }
    }
}
