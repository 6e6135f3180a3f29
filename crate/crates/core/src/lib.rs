//! Discrete-event simulation of heartbeat (aliveness) propagation over
//! directed subscription networks.

pub mod error;
pub mod metrics;
pub mod protocols;
pub mod rng;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
