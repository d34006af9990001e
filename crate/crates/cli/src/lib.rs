//! Front end for the reflection toolkit: configuration, grid sweeps,
//! point-cloud export and the verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

pub use commands::{execute, run, Command, Outcome, RunOptions, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY};
pub use config::{load_config, parse_config, ConfigError, Format, RunConfig};
pub use verify::Fault;
