use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("not a probability distribution: {0}")]
    Probability(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("instance too large for desk-scale oracle: {actual} > {cap} outcomes")]
    Capacity { actual: usize, cap: usize },
    #[error("observation model violation: {0}")]
    Model(String),
}
