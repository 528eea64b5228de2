//! Command-line front end for `combtn-core`: cost tables, threshold analysis,
//! sweeps with CSV/SVG output, grid verification, single contractions and
//! benchmarks.

pub mod args;
pub mod commands;
mod error;
pub mod formats;
pub mod svg;

pub use error::CliError;
