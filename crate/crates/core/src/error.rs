use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parameter out of domain: {0}")]
    Parameter(String),
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite input component at position {0}")]
    NonFinite(usize),
    #[error("node index {index} out of range for a lattice of {count} nodes")]
    OutOfBounds { index: usize, count: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("untrained link: {side} node {node} has no positive connection")]
    UntrainedLink { side: &'static str, node: usize },
    #[error("invalid state: {0}")]
    State(String),
}
