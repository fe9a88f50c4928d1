//! Config-driven experiments over `vacshift-core`: spectrum tables, gauge
//! checks, vacuum-energy sweeps and the Fock-space comparison.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
