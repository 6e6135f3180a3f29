//! Experiment harness for the heartbeat simulator: configuration, sweeps,
//! CSV output, plot tables and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod plot;
pub mod sweep;

pub use error::{HarnessError, Result};
