//! One-dimensional finite element solvers with an error-balance predictor for
//! the mesh size that minimises the total (truncation plus round-off) error.

pub mod assembly;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod error_analysis;
pub mod mesh_basis;
pub mod prediction;
pub mod problem;
pub mod report;
pub mod solvers;

pub use error::{FemError, Result};
