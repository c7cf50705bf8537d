//! Command-line front end: runs the experiments, persists resolved configs and
//! writes plot-ready CSV data.

pub mod args;
pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod plotdata;

pub use args::Cli;
pub use artifact::RunArtifact;
pub use commands::{execute, main_with_args};
pub use config::ExperimentConfig;
pub use error::CliError;
