use std::fmt;

/// Pipeline stage an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Babble,
    Train,
    Bridge,
    Evaluate,
    Export,
    Snapshot,
    Adapt,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Babble => "babble",
            Stage::Train => "train",
            Stage::Bridge => "bridge",
            Stage::Evaluate => "evaluate",
            Stage::Export => "export",
            Stage::Snapshot => "snapshot",
            Stage::Adapt => "adapt",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub message: String,
}

impl StageError {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, StageError>;

/// Attaches a stage label to any displayable error.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T, E: fmt::Display> AtStage<T> for std::result::Result<T, E> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|e| StageError::new(stage, e.to_string()))
    }
}
