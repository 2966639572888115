//! `chaoscope` command-line front end: argument parsing, run configs,
//! deterministic data files and manifests.

pub mod args;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod run;
pub mod table;

pub use config::RunConfig;
pub use error::CliError;
pub use output::verify_manifest;
pub use run::{resolve, run, run_config};
