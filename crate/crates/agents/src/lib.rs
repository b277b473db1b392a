//! Actor-critic agents trained with a clipped policy-gradient objective,
//! memoryless or recurrent, with an optional two-critic variant.

pub mod adam;
pub mod checkpoint;
pub mod dist;
pub mod error;
pub mod gae;
pub mod gradcheck;
pub mod model;
pub mod nn;
pub mod ppo;
pub mod rollout;
pub mod trainer;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use error::{AgentError, Result};
pub use model::{ActorCritic, NetConfig, Selection, TorsoKind};
pub use ppo::{ld_update, ppo_update, PpoConfig, UpdateStats};
pub use trainer::{train, EpisodeLog, TrainConfig, TrainOutcome};
