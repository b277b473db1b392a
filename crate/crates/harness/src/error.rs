use pomem_agents::AgentError;
use pomem_core::EnvError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Malformed experiment spec; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Spec { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("record {path}: {msg}")]
    Record { path: String, msg: String },
    #[error("every configuration of arm `{0}` failed")]
    ArmFailed(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
