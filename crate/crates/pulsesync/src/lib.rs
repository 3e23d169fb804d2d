//! Experiment harness for `pulsesync-core`: flat configuration files, seeded
//! initial conditions, CSV output and the runners behind the `pulsesync`
//! command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod numfmt;
pub mod rng;

pub use config::{Config, ConfigError, Experiment};
pub use error::RunError;
pub use experiments::{run, RunOutput};
