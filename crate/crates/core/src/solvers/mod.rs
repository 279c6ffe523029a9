//! Linear solvers: banded LU, conjugate gradients and the segregated
//! Schur-complement driver for the mixed saddle system.
//!
//! All reductions are plain left-to-right sums so that round-off levels are
//! reproducible from run to run.

mod cg;
mod lu;
mod schur;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::assembly::LinearSystem;
use crate::error::{FemError, Result};

pub use cg::{cg_solve, conjugate_gradient, CgOutcome};
pub use lu::{lu_banded_solve, BandedLu, RowScaling};
pub use schur::{schur_solve, InnerSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lu,
    Cg,
    Schur,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lu => "lu",
            Method::Cg => "cg",
            Method::Schur => "schur",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub method: Method,
    /// Zero for the direct solver; outer iterations for Schur.
    pub iterations: usize,
    /// `||F - A x|| / ||F||`, recomputed after the solve.
    pub relative_residual: f64,
    pub wall_time: Duration,
}

/// Solver selection used by sweeps and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverChoice {
    Direct,
    Cg { tol: f64 },
    Schur { tol: f64, inner: InnerSolver },
}

impl Default for SolverChoice {
    fn default() -> Self {
        SolverChoice::Direct
    }
}

pub fn solve(system: &LinearSystem, choice: SolverChoice) -> Result<SolveReport> {
    match choice {
        SolverChoice::Direct => lu_banded_solve(system),
        SolverChoice::Cg { tol } => cg_solve(system, tol, None),
        SolverChoice::Schur { tol, inner } => schur_solve(system, tol, inner),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn relative_residual(system: &LinearSystem, x: &[f64]) -> f64 {
    let f = norm2(&system.rhs);
    let r = norm2(&system.residual(x));
    if f > 0.0 {
        r / f
    } else {
        r
    }
}

pub(crate) fn check_tol(tol: f64, what: &str) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(FemError::arg(format!("{what} must be positive, got {tol}")))
    }
}
