//! Command-line front end for `lagcoh-core`: dataset files, flat config
//! files, the analysis pipeline and result emission.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod emit;
pub mod error;

pub use error::{CliError, Result};
