//! Experiment orchestration for `bpscope`: VQE training, variance scans,
//! field sweeps and per-parameter analysis, with CSV and JSON output.

pub mod adam;
pub mod analyze;
pub mod cache;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod scan;
pub mod sweep;
pub mod vqe;

pub use error::{RunError, RunResult};
