//! Command-line harness: subcommands, experiment sweeps and pipeline reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod explain;
