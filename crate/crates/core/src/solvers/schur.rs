use std::time::Instant;

use super::cg::conjugate_gradient;
use super::{check_tol, norm2, relative_residual, BandedLu, Method, RowScaling, SolveReport};
use crate::assembly::{LinearSystem, MixedBlocks};
use crate::error::{FemError, Result};

/// Solver for the inner mass-matrix systems `M y = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSolver {
    Direct,
    Cg(f64),
}

enum Inner<'a> {
    Direct(BandedLu),
    Cg(&'a MixedBlocks, f64),
}

impl Inner<'_> {
    fn solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Inner::Direct(lu) => Ok(lu.solve(x)),
            Inner::Cg(blocks, tol) => {
                let out = conjugate_gradient(
                    |p, y| blocks.m.matvec_into(p, y),
                    x,
                    *tol,
                    norm2(x),
                    10 * x.len(),
                );
                if out.converged {
                    Ok(out.x)
                } else {
                    Err(FemError::NotConverged {
                        stage: "schur inner (M)".into(),
                        iterations: out.iterations,
                        residual: out.residual_norm / norm2(x),
                        best: out.x,
                    })
                }
            }
        }
    }
}

/// Segregated solve of the mixed saddle system: CG on
/// `B^T M^-1 B U = B^T M^-1 G - H`, then `M V = G - B U`.
pub fn schur_solve(
    system: &LinearSystem,
    outer_tol: f64,
    inner: InnerSolver,
) -> Result<SolveReport> {
    check_tol(outer_tol, "outer tolerance")?;
    if let InnerSolver::Cg(t) = inner {
        check_tol(t, "inner tolerance")?;
    }
    let blocks = system.blocks.as_ref().ok_or_else(|| {
        FemError::arg("the Schur solver needs a real mixed system with D = 1 and r = 0")
    })?;
    let start = Instant::now();
    let inner = match inner {
        InnerSolver::Direct => Inner::Direct(BandedLu::factor(&blocks.m, RowScaling::Sum)?),
        InnerSolver::Cg(t) => Inner::Cg(blocks, t),
    };

    let mg = inner.solve(&blocks.g)?;
    let rhs: Vec<f64> = blocks
        .apply_bt(&mg)
        .iter()
        .zip(&blocks.h)
        .map(|(a, h)| a - h)
        .collect();
    let mut inner_err = None;
    let outcome = conjugate_gradient(
        |w, z| {
            if inner_err.is_some() {
                z.fill(0.0);
                return;
            }
            let x = blocks.apply_b(w);
            match inner.solve(&x) {
                Ok(y) => z.copy_from_slice(&blocks.apply_bt(&y)),
                Err(e) => {
                    inner_err = Some(e);
                    z.fill(0.0);
                }
            }
        },
        &rhs,
        outer_tol,
        norm2(&rhs),
        10 * rhs.len(),
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    let u = outcome.x;
    let bu = blocks.apply_b(&u);
    let gv: Vec<f64> = blocks.g.iter().zip(&bu).map(|(g, b)| g - b).collect();
    let v = inner.solve(&gv)?;

    let mut solution = vec![0.0; system.dim()];
    for (k, vk) in v.iter().enumerate() {
        solution[2 * k] = *vk;
    }
    for (e, ue) in u.iter().enumerate() {
        solution[2 * e + 1] = *ue;
    }
    let relative = relative_residual(system, &solution);
    if !outcome.converged {
        return Err(FemError::NotConverged {
            stage: "schur outer".into(),
            iterations: outcome.iterations,
            residual: relative,
            best: solution,
        });
    }
    Ok(SolveReport {
        solution,
        method: Method::Schur,
        iterations: outcome.iterations,
        relative_residual: relative,
        wall_time: start.elapsed(),
    })
}
