//! Field reconstruction, L2 errors against exact or once-refined solutions,
//! observed convergence orders and the S/M1/M2 scaling schemes.

mod field;
mod scaling;

use serde::{Deserialize, Serialize};

use crate::error::{FemError, Result};
use crate::mesh_basis::{error_points, gauss_legendre_rule, Mesh};
use crate::problem::{ProblemSpec, Scalar};

pub use field::{reconstruct, FieldView};
pub use scaling::{apply_scaling, default_scheme, ScalingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Exact,
    Refined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub refinement_level: u32,
    pub n_h: usize,
    pub value: f64,
    pub estimator: Estimator,
    pub observed_rate: Option<f64>,
}

/// Error records along successive refinements of one (flavor, p, var).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub records: Vec<ErrorRecord>,
}

impl ErrorCurve {
    pub fn push(&mut self, mut rec: ErrorRecord) {
        if let Some(prev) = self.records.last() {
            if prev.refinement_level + 1 == rec.refinement_level {
                rec.observed_rate = convergence_order(prev.value, rec.value).ok();
            }
        }
        self.records.push(rec);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Index of the global minimum; ties go to the smaller `N_h`.
    pub fn minimum_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, r) in self.records.iter().enumerate() {
            match best {
                Some(b) if self.records[b].value <= r.value => {}
                _ => best = Some(i),
            }
        }
        best
    }

    pub fn minimum(&self) -> Option<&ErrorRecord> {
        self.minimum_index().map(|i| &self.records[i])
    }
}

/// `log2(E_coarse / E_fine)`.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(FemError::arg(format!(
            "convergence order needs positive errors, got {e_coarse} and {e_fine}"
        )));
    }
    Ok((e_coarse / e_fine).log2())
}

/// Composite Gauss approximation of `||f||_2` on a mesh.
pub fn l2_norm(f: &dyn Fn(f64) -> Scalar, mesh: &Mesh, points_per_cell: usize) -> Result<f64> {
    let rule = gauss_legendre_rule(points_per_cell)?;
    let h = mesh.h();
    let mut s = 0.0;
    for c in 0..mesh.cell_count() {
        for (xi, w) in rule.iter() {
            s += w * h * f(mesh.map(c, xi)).norm_sqr();
        }
    }
    Ok(s.sqrt())
}

/// `||var_h - var_exact||_2`, in the units of the solved system.
pub fn error_exact(field: &FieldView, spec: &ProblemSpec) -> Result<ErrorRecord> {
    let ex = spec
        .exact
        .as_ref()
        .ok_or_else(|| FemError::ExactUnavailable(spec.label.clone()))?;
    let exact = ex.get(field.var());
    let inv = 1.0 / field.scale();
    let mesh = field.mesh();
    let rule = gauss_legendre_rule(error_points(field.degree()))?;
    let table = field.tabulate(rule.points());
    let h = mesh.h();
    let mut s = 0.0;
    for c in 0..mesh.cell_count() {
        for (q, (xi, w)) in rule.iter().enumerate() {
            let e = field.value_at(&table, c, q) - exact(mesh.map(c, xi)) * inv;
            s += w * h * e.norm_sqr();
        }
    }
    Ok(ErrorRecord {
        refinement_level: mesh.refinement_level(),
        n_h: field.dof_count(),
        value: s.sqrt(),
        estimator: Estimator::Exact,
        observed_rate: None,
    })
}

/// `||var_h - var_{h/2}||_2` on the fine mesh, in the coarse field's units.
pub fn error_refined(coarse: &FieldView, fine: &FieldView) -> Result<ErrorRecord> {
    let (lc, lf) = (
        coarse.mesh().refinement_level(),
        fine.mesh().refinement_level(),
    );
    if lf != lc + 1 {
        return Err(FemError::MeshMismatch {
            coarse: lc,
            fine: lf,
        });
    }
    if coarse.var() != fine.var()
        || coarse.flavor() != fine.flavor()
        || coarse.degree() != fine.degree()
    {
        return Err(FemError::arg(
            "refined estimator needs fields of the same variable, flavor and degree",
        ));
    }
    let rule = gauss_legendre_rule(error_points(fine.degree()))?;
    let fine_table = fine.tabulate(rule.points());
    let halves: [Vec<f64>; 2] =
        [0.0, 1.0].map(|s| rule.points().iter().map(|x| (x + s) / 2.0).collect());
    let coarse_tables = [coarse.tabulate(&halves[0]), coarse.tabulate(&halves[1])];
    let ratio = fine.scale() / coarse.scale();
    let h = fine.mesh().h();
    let mut s = 0.0;
    for c in 0..fine.mesh().cell_count() {
        let table = &coarse_tables[c % 2];
        for (q, w) in rule.weights().iter().enumerate() {
            let e = coarse.value_at(table, c / 2, q) - fine.value_at(&fine_table, c, q) * ratio;
            s += w * h * e.norm_sqr();
        }
    }
    Ok(ErrorRecord {
        refinement_level: lc,
        n_h: coarse.dof_count(),
        value: s.sqrt(),
        estimator: Estimator::Refined,
        observed_rate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_basis::build_mesh;
    use crate::problem::catalog;
    use num_complex::Complex64;

    #[test]
    fn order_examples() {
        assert!((convergence_order(1e-4, 2.5e-5).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(convergence_order(3.0, 3.0).unwrap(), 0.0);
        assert!(convergence_order(0.0, 1.0).is_err());
        assert!(convergence_order(1.0, -1.0).is_err());
    }

    #[test]
    fn norms_of_known_functions() {
        let mesh = build_mesh(4).unwrap();
        let one = |_: f64| Complex64::new(1.0, 0.0);
        assert!((l2_norm(&one, &mesh, 3).unwrap() - 1.0).abs() < 1e-14);
        let s = |x: f64| Complex64::new((2.0 * std::f64::consts::PI * x).sin(), 0.0);
        assert!((l2_norm(&s, &mesh, 6).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let h = catalog("bench-helmholtz", None).unwrap();
        let u = h.exact.unwrap().u;
        assert!((l2_norm(&*u, &mesh, 6).unwrap() - 1.26).abs() < 0.01);
    }

    #[test]
    fn curve_minimum_prefers_smaller_n() {
        let mut c = ErrorCurve::default();
        for (l, v) in [(1, 3.0), (2, 1.0), (3, 1.0), (4, 2.0)] {
            c.push(ErrorRecord {
                refinement_level: l,
                n_h: 1 << l,
                value: v,
                estimator: Estimator::Exact,
                observed_rate: None,
            });
        }
        assert_eq!(c.minimum_index(), Some(1));
        assert!((c.records[1].observed_rate.unwrap() - 3f64.log2()).abs() < 1e-15);
        assert_eq!(c.records[0].observed_rate, None);
    }
}
