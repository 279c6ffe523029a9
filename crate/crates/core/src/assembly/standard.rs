use num_complex::Complex64;

use super::{constrain, finish, ComplexSystem, DirichletMode, DofMap, Field, Flavor, LinearSystem};
use crate::error::{FemError, Result};
use crate::mesh_basis::{assembly_points, gauss_legendre_rule, LagrangeBasis, Mesh, MAX_DEGREE};
use crate::problem::{BoundaryKind, ProblemSpec, ScalarKind, Side};

pub(crate) fn check_degree(p: usize) -> Result<()> {
    if p == 0 || p > MAX_DEGREE {
        return Err(FemError::arg(format!(
            "polynomial degree must be in 1..={MAX_DEGREE}, got {p}"
        )));
    }
    Ok(())
}

/// Standard Galerkin system for `-(eta_x, D u_x) + (eta, r u) = (eta, f) - (eta, D h n)_N`.
pub fn assemble_standard(
    spec: &ProblemSpec,
    mesh: &Mesh,
    p: usize,
    mode: DirichletMode,
) -> Result<LinearSystem> {
    check_degree(p)?;
    if let DirichletMode::Weak(rho) = mode {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(FemError::arg(format!(
                "penalty must be positive, got {rho}"
            )));
        }
    }
    let dofs = DofMap {
        flavor: Flavor::Standard,
        degree: p,
        cells: mesh.cell_count(),
        complex: spec.kind == ScalarKind::Complex,
    };
    let n = dofs.scalar_len();
    let mut sys = ComplexSystem::zeros(n, p, p);

    let rule = gauss_legendre_rule(assembly_points(p))?;
    let basis = LagrangeBasis::continuous(p)?;
    let table = basis.tabulate(rule.points());
    let h = mesh.h();
    let nb = p + 1;
    let mut local_a = vec![Complex64::default(); nb * nb];
    let mut local_f = vec![Complex64::default(); nb];

    for cell in 0..mesh.cell_count() {
        local_a.fill(Complex64::default());
        local_f.fill(Complex64::default());
        for (q, (xi, w)) in rule.iter().enumerate() {
            let x = mesh.map(cell, xi);
            let jw = w * h;
            let d = (spec.d)(x) / (h * h);
            let r = (spec.r)(x);
            let f = (spec.f)(x);
            let phi = table.row(0, q);
            let dphi = table.row(1, q);
            for a in 0..nb {
                for b in 0..nb {
                    local_a[a * nb + b] += jw * (r * (phi[a] * phi[b]) - d * (dphi[a] * dphi[b]));
                }
                local_f[a] += jw * phi[a] * f;
            }
        }
        for a in 0..nb {
            let i = dofs.scalar_index(Field::U, cell, a);
            for b in 0..nb {
                let j = dofs.scalar_index(Field::U, cell, b);
                sys.matrix.add(i, j, local_a[a * nb + b]);
            }
            sys.rhs[i] += local_f[a];
        }
    }

    let mut constrained = Vec::new();
    for side in [Side::Left, Side::Right] {
        let bc = spec.bc(side);
        let xs = side.coordinate();
        let nrm = side.normal();
        let (cell, node) = match side {
            Side::Left => (0, 0),
            Side::Right => (mesh.cell_count() - 1, p),
        };
        let s = dofs.scalar_index(Field::U, cell, node);
        match (bc.kind, mode) {
            (BoundaryKind::Neumann, _) => {
                sys.rhs[s] -= (spec.d)(xs) * bc.value * nrm;
            }
            (BoundaryKind::Dirichlet, DirichletMode::Strong) => constrained.push((s, bc.value)),
            (BoundaryKind::Dirichlet, DirichletMode::Weak(rho)) => {
                let (phi, dphi) = basis.eval(if side == Side::Left { 0.0 } else { 1.0 });
                let d = (spec.d)(xs);
                let g = bc.value;
                for a in 0..nb {
                    let i = dofs.scalar_index(Field::U, cell, a);
                    let dphi_a = dphi[a] / h;
                    for b in 0..nb {
                        let j = dofs.scalar_index(Field::U, cell, b);
                        let dphi_b = dphi[b] / h;
                        let v = phi[a] * d * dphi_b * nrm - dphi_a * phi[b] * nrm
                            + rho * phi[a] * phi[b] * nrm;
                        sys.matrix.add(i, j, v);
                    }
                    sys.rhs[i] += -dphi_a * g * nrm + rho * phi[a] * g * nrm;
                }
            }
        }
    }
    for &(s, g) in &constrained {
        constrain(&mut sys, s, g);
    }
    let constrained: Vec<usize> = constrained.iter().map(|&(s, _)| s).collect();

    let symmetric = spec.kind == ScalarKind::Real && mode == DirichletMode::Strong;
    Ok(finish(
        sys,
        dofs,
        spec.kind,
        mesh.clone(),
        &constrained,
        None,
        symmetric,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_basis::build_mesh;
    use crate::problem::catalog;

    #[test]
    fn linear_poisson_rows_on_two_cells() {
        let spec = catalog("bench-poisson", None).unwrap();
        let sys =
            assemble_standard(&spec, &build_mesh(1).unwrap(), 1, DirichletMode::Strong).unwrap();
        let a = sys.matrix.to_dense();
        assert_eq!(a[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(a[2], vec![0.0, 0.0, 1.0]);
        // interior row before column purge is {2, -4, 2}; the purge leaves the diagonal
        assert!((a[1][1] + 4.0).abs() < 1e-14);
        assert_eq!((a[1][0], a[1][2]), (0.0, 0.0));
        let g = (-0.25f64).exp();
        assert_eq!(sys.rhs[0], g);
        assert_eq!(sys.rhs[2], g);
    }

    #[test]
    fn unconstrained_rows_sum_to_zero() {
        let spec = catalog("bench-poisson-dn", None).unwrap();
        for p in 1..=5 {
            let mesh = build_mesh(3).unwrap();
            let sys = assemble_standard(&spec, &mesh, p, DirichletMode::Strong).unwrap();
            let a = &sys.matrix;
            // rows not touching the Dirichlet node at x = 0
            for i in (p + 1)..a.dim() {
                let s: f64 = a.row_entries(i).map(|(_, v)| v).sum();
                let m: f64 = a.row_entries(i).map(|(_, v)| v.abs()).sum();
                assert!(s.abs() <= 1e-13 * m, "p={p} row {i}: {s}");
            }
        }
    }

    #[test]
    fn symmetric_for_real_strong() {
        for name in ["bench-poisson", "bench-diffusion"] {
            let spec = catalog(name, None).unwrap();
            for p in 1..=4 {
                let sys =
                    assemble_standard(&spec, &build_mesh(4).unwrap(), p, DirichletMode::Strong)
                        .unwrap();
                assert!(sys.symmetric);
                assert!(sys.matrix.symmetry_defect() <= 1e-14);
            }
        }
    }

    #[test]
    fn sizes_and_bandwidth() {
        let spec = catalog("bench-helmholtz", None).unwrap();
        let sys =
            assemble_standard(&spec, &build_mesh(3).unwrap(), 2, DirichletMode::Strong).unwrap();
        assert_eq!(sys.dim(), 2 * (2 * 8 + 1));
        assert!(sys.matrix.lower() + sys.matrix.upper() <= 2 * (2 * 2 + 1));
        assert_eq!(sys.constrained, vec![0, 1]);
        assert_eq!(sys.rhs[0], 1.0);
        assert_eq!(sys.rhs[1], 0.0);
    }

    #[test]
    fn weak_mode_rejects_bad_penalty() {
        let spec = catalog("bench-poisson", None).unwrap();
        let mesh = build_mesh(2).unwrap();
        assert!(assemble_standard(&spec, &mesh, 2, DirichletMode::Weak(0.0)).is_err());
        assert!(assemble_standard(&spec, &mesh, 0, DirichletMode::Strong).is_err());
    }
}
