//! Experiment drivers for the `multiband` command-line tool.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod output;
pub mod scenario;
