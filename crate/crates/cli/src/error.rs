use pomem_agents::AgentError;
use pomem_core::EnvError;
use pomem_harness::HarnessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::ConfigLine { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Config(_) | EnvError::Capability { .. } | EnvError::UnknownId { .. } | EnvError::Layout { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::Config(_) => CliError::Usage(e.to_string()),
            AgentError::Env(env) => env.into(),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Spec { .. } | HarnessError::Config(_) => CliError::Usage(e.to_string()),
            HarnessError::Agent(a) => a.into(),
            HarnessError::Env(env) => env.into(),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
