//! Command-line front end for `crcop-core`: run configuration, dataset and
//! report files, and the parallel study/sweep drivers.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::RunConfig;
pub use error::CliError;
