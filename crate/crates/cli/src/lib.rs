//! Batch harness around `hs_core`: scenario loading, trajectory output,
//! cross-solver comparison and verification reports.

pub mod config;
pub mod run;
pub mod scenario;

pub use config::{RunConfig, SolverChoice};
