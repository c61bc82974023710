//! Batch front-end for `qedyn`: configuration parsing and the verbs behind
//! the `qedyn` binary.

pub mod config;
pub mod run;

pub use config::{ConfigError, RunConfig, SolverChoice};
