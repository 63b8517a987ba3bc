use eqscope_conic::{ConicError, SolveStatus};
use eqscope_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IdentifyError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("solver returned {status:?}: {diagnostic}")]
    Solver { status: SolveStatus, diagnostic: String },
    #[error("observation matrix not identifiable: rank {rank} < {need}")]
    NotIdentifiable { rank: usize, need: usize },
    #[error("need at least {need} observations, got {got}")]
    NotEnoughObservations { need: usize, got: usize },
    #[error("singular observation matrix")]
    Singular,
    #[error("bisection bracket failure: {0}")]
    Bracket(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
}

impl IdentifyError {
    pub fn solver(status: SolveStatus, diagnostic: Option<String>) -> Self {
        IdentifyError::Solver {
            status,
            diagnostic: diagnostic.unwrap_or_default(),
        }
    }
}
