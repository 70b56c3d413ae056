//! Configuration, file formats and the `qlab` command-line driver.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
