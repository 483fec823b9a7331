//! The `omega` command-line tool: argument parsing, input files and
//! subcommands over `omega-core`.

// `!(x > 0.0)` guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod input;

pub use args::{parse_args, RunConfig};
pub use commands::run;
pub use error::CliError;
