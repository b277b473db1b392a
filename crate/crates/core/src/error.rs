use thiserror::Error;

use crate::spaces::ObservabilityLevel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{env} does not support the {level} observability level")]
    Capability {
        env: String,
        level: ObservabilityLevel,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("illegal action {action} for instance {instance}")]
    IllegalAction { instance: usize, action: usize },

    #[error("maze layout error at row {row}, col {col}: {msg}")]
    Layout { row: usize, col: usize, msg: String },

    #[error("unknown environment id '{id}' (valid: {valid})")]
    UnknownId { id: String, valid: String },
}

pub type Result<T, E = EnvError> = std::result::Result<T, E>;
