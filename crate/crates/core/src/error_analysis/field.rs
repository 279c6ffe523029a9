use num_complex::Complex64;

use crate::assembly::{Field, Flavor, LinearSystem};
use crate::error::{FemError, Result};
use crate::mesh_basis::{BasisTable, LagrangeBasis, Mesh};
use crate::problem::Variable;

/// Piecewise polynomial view of one variable of a discrete solution.
#[derive(Debug, Clone)]
pub struct FieldView {
    var: Variable,
    flavor: Flavor,
    degree: usize,
    mesh: Mesh,
    basis: LagrangeBasis,
    order: usize,
    sign: f64,
    /// `cells x basis.len()`, cell-major.
    coeffs: Vec<Complex64>,
    scale: f64,
    dof_count: usize,
}

/// Standard FEM differentiates `u_h`; mixed FEM uses `u_x = -v`, `u_xx = -v_x`.
pub fn reconstruct(solution: &[f64], system: &LinearSystem, var: Variable) -> Result<FieldView> {
    let map = system.dof_map;
    let p = map.degree;
    let (field, order, sign) = match (map.flavor, var) {
        (Flavor::Standard, v) => {
            if v.derivative_order() > p {
                return Err(FemError::VariableUnavailable {
                    var: v.name().into(),
                    flavor: map.flavor.name().into(),
                    p,
                });
            }
            (Field::U, v.derivative_order(), 1.0)
        }
        (Flavor::Mixed, Variable::U) => (Field::UDisc, 0, 1.0),
        (Flavor::Mixed, Variable::Ux) => (Field::V, 0, -1.0),
        (Flavor::Mixed, Variable::Uxx) => (Field::V, 1, -1.0),
    };
    let basis = match field {
        Field::UDisc => LagrangeBasis::discontinuous(p - 1)?,
        _ => LagrangeBasis::continuous(p)?,
    };
    let scalars = system.scalar_values(solution);
    let nb = map.local_len(field);
    let mut coeffs = Vec::with_capacity(map.cells * nb);
    for c in 0..map.cells {
        for a in 0..nb {
            coeffs.push(scalars[map.scalar_index(field, c, a)]);
        }
    }
    let s = system.scaling;
    let scale = if field == Field::V {
        s.v_factor
    } else {
        s.u_factor
    };
    Ok(FieldView {
        var,
        flavor: map.flavor,
        degree: p,
        mesh: system.mesh.clone(),
        basis,
        order,
        sign,
        coeffs,
        scale,
        dof_count: map.len(),
    })
}

impl FieldView {
    pub fn var(&self) -> Variable {
        self.var
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Degree `p` of the discretisation the field came from.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Number of unknowns of the system that produced the field.
    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// Physical values equal field values times this factor.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn tabulate(&self, points: &[f64]) -> BasisTable {
        self.basis.tabulate(points)
    }

    /// Value in cell `cell` at tabulated point `q`.
    pub fn value_at(&self, table: &BasisTable, cell: usize, q: usize) -> Complex64 {
        let nb = self.basis.len();
        let row = table.row(self.order, q);
        let c = &self.coeffs[cell * nb..(cell + 1) * nb];
        let mut s = Complex64::default();
        for (a, phi) in row.iter().enumerate() {
            s += c[a] * *phi;
        }
        s * (self.sign / self.mesh.h().powi(self.order as i32))
    }

    /// Value at a physical point; interfaces resolve to the cell on the right.
    pub fn eval(&self, x: f64) -> Complex64 {
        let (cell, xi) = self.mesh.locate(x);
        self.eval_in_cell(cell, xi)
    }

    pub fn eval_in_cell(&self, cell: usize, xi: f64) -> Complex64 {
        let d = self.basis.eval_derivative(self.order, xi);
        let nb = self.basis.len();
        let c = &self.coeffs[cell * nb..(cell + 1) * nb];
        let mut s = Complex64::default();
        for (a, phi) in d.iter().enumerate() {
            s += c[a] * *phi;
        }
        s * (self.sign / self.mesh.h().powi(self.order as i32))
    }

    /// Field expressed in physical units.
    pub fn rescaled(&self) -> FieldView {
        let mut out = self.clone();
        let k = self.scale;
        out.coeffs.iter_mut().for_each(|c| *c *= k);
        out.scale = 1.0;
        out
    }

    pub fn l2_norm(&self) -> f64 {
        let rule =
            crate::mesh_basis::gauss_legendre_rule(crate::mesh_basis::error_points(self.degree))
                .expect("error rule exists for every supported degree");
        let table = self.tabulate(rule.points());
        let h = self.mesh.h();
        let mut s = 0.0;
        for c in 0..self.mesh.cell_count() {
            for (q, w) in rule.weights().iter().enumerate() {
                s += w * h * self.value_at(&table, c, q).norm_sqr();
            }
        }
        s.sqrt()
    }
}
