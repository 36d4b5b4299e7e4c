//! Command-line front end: run files in, deterministic CSV and JSON out.

pub mod commands;
pub mod config;
pub mod output;
