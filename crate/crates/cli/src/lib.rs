//! Config-driven front end: `analyze`, `split` and `verify` over the model
//! families of [`simop`], writing a JSON report and plot data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod report;

pub use commands::{run, write_outputs, Command, Outcome, RunOptions};
pub use config::{load, LoadedConfig, RunConfig};
pub use error::CliError;
pub use report::Report;
