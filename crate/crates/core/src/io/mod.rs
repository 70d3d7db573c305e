//! Configuration files, expressions and CSV output.

pub mod config;
pub mod expr;
pub mod output;

pub use config::{parse_config, parse_config_str, BuiltProblem, ConfigFileError, RunConfig};
