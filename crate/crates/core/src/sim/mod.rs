//! Discrete-event engine.

pub mod engine;
pub mod failure;
pub mod queue;
pub mod world;

pub use engine::{run, PhaseMode, SimConfig, Simulation};
pub use failure::{FailureModel, Recovery};
pub use queue::{Event, EventKind, EventQueue};
pub use world::{BeliefRecord, Observation, World};
