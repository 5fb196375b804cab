//! Config-driven runner for the entropy-lab experiments.

pub mod config;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, RawConfig};
pub use run::{run, Command, Manifest, RunError};
