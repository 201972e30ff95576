//! Command-line laboratory built on `mase-core`: scenario files, run
//! directories with content manifests, and parameter sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
