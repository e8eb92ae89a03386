//! Command-line front end for `vcselrc-core`: JSON run configs, CSV/JSON
//! result tables with provenance headers, and atomic output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use output::{Format, OutputSet};
