use std::time::Instant;

use super::{check_tol, dot, norm2, relative_residual, Method, SolveReport};
use crate::assembly::LinearSystem;
use crate::error::{FemError, Result};

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Recursively updated residual norm at exit.
    pub residual_norm: f64,
}

/// Plain CG from `x0 = 0`, stopping when the recursive residual satisfies
/// `||r|| <= tol * reference`.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    reference: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = tol * reference;
    let mut it = 0;
    while rr.sqrt() > target {
        if it == max_iter {
            return CgOutcome {
                x,
                iterations: it,
                converged: false,
                residual_norm: rr.sqrt(),
            };
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap == 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        it += 1;
    }
    let residual_norm = rr.sqrt();
    CgOutcome {
        x,
        iterations: it,
        converged: residual_norm <= target,
        residual_norm,
    }
}

/// Deterministic probe vectors for the definiteness check.
fn probe(k: usize, n: usize) -> impl Iterator<Item = f64> {
    let golden = 0.618_033_988_749_894_9;
    let shift = 0.1 + 0.37 * k as f64;
    (0..n).map(move |i| ((i as f64 + 1.0) * golden * (k as f64 + 1.0) + shift).sin())
}

/// Returns +1 or -1 when 20 Rayleigh quotients agree in sign.
pub(crate) fn definiteness_sign(
    apply: &mut impl FnMut(&[f64], &mut [f64]),
    n: usize,
) -> Result<f64> {
    let (mut pos, mut neg) = (0, 0);
    let mut az = vec![0.0; n];
    for k in 0..20 {
        let z: Vec<f64> = probe(k, n).collect();
        apply(&z, &mut az);
        let q = dot(&z, &az);
        if q > 0.0 {
            pos += 1;
        } else if q < 0.0 {
            neg += 1;
        }
    }
    match (pos, neg) {
        (20, 0) => Ok(1.0),
        (0, 20) => Ok(-1.0),
        _ => Err(FemError::NotDefinite),
    }
}

/// CG on a symmetric system. Identity rows stay fixed at their right-hand
/// side; a negative definite operator is negated first.
pub fn cg_solve(system: &LinearSystem, tol: f64, max_iter: Option<usize>) -> Result<SolveReport> {
    check_tol(tol, "CG tolerance")?;
    if !system.symmetric {
        return Err(FemError::arg("CG requires a symmetric system"));
    }
    let start = Instant::now();
    let n = system.dim();
    let max_iter = max_iter.unwrap_or(10 * n);
    let mut free = vec![true; n];
    for &c in &system.constrained {
        free[c] = false;
    }
    let free_idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
    let mut fixed = vec![0.0; n];
    for &c in &system.constrained {
        fixed[c] = system.rhs[c];
    }

    let mut full = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut apply_free = |x: &[f64], y: &mut [f64]| {
        for (k, &i) in free_idx.iter().enumerate() {
            full[i] = x[k];
        }
        system.matrix.matvec_into(&full, &mut out);
        for (k, &i) in free_idx.iter().enumerate() {
            y[k] = out[i];
        }
    };
    let sign = definiteness_sign(&mut apply_free, free_idx.len())?;
    let b: Vec<f64> = free_idx.iter().map(|&i| sign * system.rhs[i]).collect();
    let reference = norm2(&system.rhs);
    let outcome = conjugate_gradient(
        |x, y| {
            apply_free(x, y);
            if sign < 0.0 {
                y.iter_mut().for_each(|v| *v = -*v);
            }
        },
        &b,
        tol,
        reference,
        max_iter,
    );
    let mut solution = fixed;
    for (k, &i) in free_idx.iter().enumerate() {
        solution[i] = outcome.x[k];
    }
    let relative = relative_residual(system, &solution);
    if !outcome.converged {
        return Err(FemError::NotConverged {
            stage: "cg".into(),
            iterations: outcome.iterations,
            residual: relative,
            best: solution,
        });
    }
    Ok(SolveReport {
        solution,
        method: Method::Cg,
        iterations: outcome.iterations,
        relative_residual: relative,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(a: &[Vec<f64>]) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for (i, row) in a.iter().enumerate() {
                y[i] = dot(row, x);
            }
        }
    }

    #[test]
    fn identity_in_one_iteration() {
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let b = [1.0, 2.0, 3.0];
        let out = conjugate_gradient(dense_apply(&a), &b, 1e-12, norm2(&b), 10);
        assert!(out.converged && out.iterations <= 1);
        assert_eq!(out.x, b.to_vec());
    }

    #[test]
    fn non_convergence_flagged() {
        let a: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                (0..6)
                    .map(|j| if i == j { (i + 1) as f64 } else { 0.0 })
                    .collect()
            })
            .collect();
        let b = [1.0; 6];
        let out = conjugate_gradient(dense_apply(&a), &b, 1e-14, norm2(&b), 2);
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }

    #[test]
    fn sign_probe() {
        let a = vec![vec![-2.0, 1.0], vec![1.0, -2.0]];
        assert_eq!(definiteness_sign(&mut dense_apply(&a), 2).unwrap(), -1.0);
        let a = vec![vec![1.0, 0.0], vec![0.0, -1.0]];
        assert!(matches!(
            definiteness_sign(&mut dense_apply(&a), 2),
            Err(FemError::NotDefinite)
        ));
    }
}
