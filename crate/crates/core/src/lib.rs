//! Deterministic, batch-vectorized partially observable environments.
//!
//! Each environment exposes up to three observability levels of the same
//! underlying process (see [`ObservabilityLevel`]), so agents with more or less
//! state information can be compared on otherwise identical tasks.

pub mod bench;
pub mod env;
pub mod envs;
pub mod error;
pub mod registry;
pub mod rng;
pub mod spaces;
pub mod vector;

pub use env::{Environment, Transition};
pub use error::{EnvError, Result};
pub use registry::{make, AnyEnv, AnyState};
pub use rng::RngStream;
pub use spaces::{
    discounted_return, ActionMask, Capabilities, DiscountedReturnAccumulator, ObservabilityLevel, StepResult,
};
pub use vector::{BatchEnv, BatchStep};
