//! File formats and command implementations behind the `exo` binary.

pub mod cli;
pub mod cohort;
pub mod config;
pub mod error;
pub mod jsonl;
pub mod plan;
pub mod report;
pub mod traces;

pub use error::CliError;
