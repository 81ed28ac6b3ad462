//! Experiment runner for the ell0 solvers: run configs, traces, catalogs
//! and plots.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod tables;

pub use error::CliError;
