//! Experiment protocol: hyperparameter sweeps selected by area under the
//! learning curve, multi-seed reruns, and the gap between memoryless agents
//! with partial and full information that memory agents are scored against.

pub mod config;
pub mod curve;
pub mod error;
pub mod gap;
pub mod protocol;
pub mod record;
pub mod select;
pub mod smooth;
pub mod spec;
pub mod stats;

pub use config::{AgentKind, RunConfig};
pub use error::{HarnessError, Result};
pub use gap::{improvability_gap, GapReport};
pub use protocol::{run_protocol, ArmReport, ProtocolOptions, ProtocolReport};
pub use record::{Metric, RunRecord};
pub use select::auc_select;
pub use spec::ExperimentSpec;
pub use stats::{confidence_interval, Interval};
