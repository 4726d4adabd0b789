//! Command-line front end for `bfm-core`: density ingestion, the solve,
//! interpolate and benchmark commands, and their file formats.

pub mod args;
pub mod commands;
pub mod density;
pub mod dump;
pub mod error;
pub mod pgm;
pub mod report;

pub use error::{CliError, Result};
