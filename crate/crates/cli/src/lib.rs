//! Config-driven runner for generalized-travelling-wave experiments.
//!
//! Every verb reads one TOML file, writes its products (field files, CSV
//! tables, JSON reports) to the output directory and prints a JSON summary.
//! Failures map to exit codes: 2 configuration or input, 3 hyperbolicity,
//! 4 sonic point or sub-shock, 5 compatibility or structural condition,
//! 6 anything else (including failed verification checks).

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod expr;

pub use cli::{run, Args, Command};
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use experiment::{Experiment, RunSettings};
