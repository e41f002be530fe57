//! Experiment driver for `kgfluct-core`: JSON configs, subcommand dispatch
//! and the result file formats.

pub mod config;
pub mod error;
pub mod io;
pub mod run;
pub mod validate;

pub use config::{parse_config, ConfigError, Engine, ExperimentConfig, Tolerances};
pub use error::{CliError, CliResult};
pub use run::{run_experiment, Command, RunSummary};
