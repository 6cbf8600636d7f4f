//! Trainability analysis for circuits built from local 2-design blocks.
//!
//! - [`pauli`]: Pauli-string algebra.
//! - [`circuit`]: block circuits and their support geometry.
//! - [`geometry`]: paths, path sets, lengths and widths.
//! - [`bounds`]: analytic variance lower bounds.
//! - [`twirl`]: exact gradient variance by backward pattern propagation.
//! - [`simulator`]: statevector simulation, gradients, Monte-Carlo variance.
//! - [`models`]: Hamiltonians, the toric code, exact diagonalization, entropies.
//! - [`ansatz`]: Cartan-block circuit families.

pub mod ansatz;
pub mod bounds;
pub mod circuit;
pub mod error;
pub mod geometry;
pub mod models;
pub mod pauli;
pub mod simulator;
pub mod twirl;

pub use error::{Error, Result};
