//! Library side of the `bct` command-line tool: configuration, instance
//! files, and the JSON documents each subcommand produces.

mod commands;
mod config;
mod error;
mod input;
mod output;

pub use commands::run;
pub use config::{Command, Drafting, ExactMethod, GenOptions, Plan, RunConfig, Threads};
pub use error::CliError;
pub use input::{parse_instance_file, parse_instance_str};
pub use output::{Document, ErrorDocument, SCHEMA_VERSION};
