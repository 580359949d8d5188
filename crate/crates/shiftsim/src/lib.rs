//! File formats, experiment drivers and the `shiftsim` command line on top
//! of `shiftsim-core`.
//!
//! Every command is a pure function of its flags and `--seed`; `--threads`
//! only changes how index-keyed tasks are spread over workers.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod parallel;
pub mod suites;

pub use cli::run;
pub use error::{CliError, Result};
