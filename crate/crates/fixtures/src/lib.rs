//! Brute-force oracles and golden data for testing `bpscope-core`.
//!
//! Everything here is deliberately slow and literal. Nothing in this crate is
//! used by the library or the CLI.

pub mod dense;
pub mod golden;
pub mod paths;
pub mod random;
pub mod report;
pub mod twirl_oracle;

pub use dense::{dense_energy, dense_gradient_fd, dense_state, dense_unitary};
pub use paths::enumerate_path_sets;
pub use report::OracleReport;
pub use twirl_oracle::brute_twirl_variance;
