//! Solvers for generalized absolute value equations `Ax - B|x| - c = 0`.
pub mod bench;
pub mod convergence;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod solver;
pub mod splitting;

pub use error::{Error, Result};
