use num_complex::Complex64;

use super::standard::check_degree;
use super::{constrain, finish, BandedMatrix, ComplexSystem, DofMap, Field, Flavor, LinearSystem};
use crate::error::Result;
use crate::mesh_basis::{assembly_points, gauss_legendre_rule, LagrangeBasis, Mesh};
use crate::problem::{BoundaryKind, ProblemSpec, ScalarKind, Side};

/// Blocks of the real saddle system `[[M, B], [B^T, 0]] [V; U] = [G; H]` in
/// natural (non-interleaved) numbering.
#[derive(Debug, Clone)]
pub struct MixedBlocks {
    pub degree: usize,
    pub cells: usize,
    pub m: BandedMatrix<f64>,
    /// Cell-local `B`, `(p + 1) x p` row-major per cell; `u` unknowns never
    /// couple across cells.
    pub b_local: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl MixedBlocks {
    pub fn nv(&self) -> usize {
        self.degree * self.cells + 1
    }

    pub fn nu(&self) -> usize {
        self.degree * self.cells
    }

    fn local(&self, cell: usize) -> &[f64] {
        let k = (self.degree + 1) * self.degree;
        &self.b_local[cell * k..(cell + 1) * k]
    }

    /// `B w` for `w` in u-space.
    pub fn apply_b(&self, w: &[f64]) -> Vec<f64> {
        let p = self.degree;
        let mut y = vec![0.0; self.nv()];
        for c in 0..self.cells {
            let bl = self.local(c);
            for a in 0..=p {
                let mut s = 0.0;
                for b in 0..p {
                    s += bl[a * p + b] * w[c * p + b];
                }
                y[c * p + a] += s;
            }
        }
        y
    }

    /// `B^T y` for `y` in v-space.
    pub fn apply_bt(&self, y: &[f64]) -> Vec<f64> {
        let p = self.degree;
        let mut z = vec![0.0; self.nu()];
        for c in 0..self.cells {
            let bl = self.local(c);
            for b in 0..p {
                let mut s = 0.0;
                for a in 0..=p {
                    s += bl[a * p + b] * y[c * p + a];
                }
                z[c * p + b] = s;
            }
        }
        z
    }

    pub fn scale_b(&mut self, k: f64) {
        self.b_local.iter_mut().for_each(|v| *v *= k);
    }
}

/// Mixed system for `v = -u_x`, `-D_x v - D v_x + r u = f` with the
/// `P_p / P_{p-1}^disc` pair. Neumann data fixes `v`, Dirichlet data is natural.
pub fn assemble_mixed(spec: &ProblemSpec, mesh: &Mesh, p: usize) -> Result<LinearSystem> {
    check_degree(p)?;
    let dofs = DofMap {
        flavor: Flavor::Mixed,
        degree: p,
        cells: mesh.cell_count(),
        complex: spec.kind == ScalarKind::Complex,
    };
    let n = dofs.scalar_len();
    let mut sys = ComplexSystem::zeros(n, 2 * p, 2 * p);

    let rule = gauss_legendre_rule(assembly_points(p))?;
    let vb = LagrangeBasis::continuous(p)?;
    let ub = LagrangeBasis::discontinuous(p - 1)?;
    let vt = vb.tabulate(rule.points());
    let ut = ub.tabulate(rule.points());
    let h = mesh.h();
    let (nv, nu) = (p + 1, p);
    let zero = Complex64::default();
    let mut lm = vec![zero; nv * nv];
    let mut lb = vec![zero; nv * nu];
    let mut lc = vec![zero; nu * nv];
    let mut lr = vec![zero; nu * nu];
    let mut lh = vec![zero; nu];

    for cell in 0..mesh.cell_count() {
        for buf in [&mut lm, &mut lb, &mut lc, &mut lr] {
            buf.fill(zero);
        }
        lh.fill(zero);
        for (q, (xi, w)) in rule.iter().enumerate() {
            let x = mesh.map(cell, xi);
            let jw = w * h;
            let phi = vt.row(0, q);
            let dphi = vt.row(1, q);
            let psi = ut.row(0, q);
            let (d, dx, r, f) = ((spec.d)(x), (spec.dx)(x), (spec.r)(x), (spec.f)(x));
            for a in 0..nv {
                for b in 0..nv {
                    lm[a * nv + b] += Complex64::from(jw * (phi[a] * phi[b]));
                }
                for b in 0..nu {
                    lb[a * nu + b] += Complex64::from(-w * dphi[a] * psi[b]);
                }
            }
            for e in 0..nu {
                for a in 0..nv {
                    lc[e * nv + a] -= jw * psi[e] * (dx * phi[a] + d * (dphi[a] / h));
                }
                for b in 0..nu {
                    lr[e * nu + b] += jw * (psi[e] * psi[b]) * r;
                }
                lh[e] += jw * psi[e] * f;
            }
        }
        if spec.unit_diffusion {
            for e in 0..nu {
                for a in 0..nv {
                    lc[e * nv + a] = lb[a * nu + e];
                }
            }
            lr.fill(zero);
        }
        for a in 0..nv {
            let i = dofs.scalar_index(Field::V, cell, a);
            for b in 0..nv {
                sys.matrix
                    .add(i, dofs.scalar_index(Field::V, cell, b), lm[a * nv + b]);
            }
            for b in 0..nu {
                sys.matrix
                    .add(i, dofs.scalar_index(Field::UDisc, cell, b), lb[a * nu + b]);
            }
        }
        for e in 0..nu {
            let i = dofs.scalar_index(Field::UDisc, cell, e);
            for a in 0..nv {
                sys.matrix
                    .add(i, dofs.scalar_index(Field::V, cell, a), lc[e * nv + a]);
            }
            for b in 0..nu {
                sys.matrix
                    .add(i, dofs.scalar_index(Field::UDisc, cell, b), lr[e * nu + b]);
            }
            sys.rhs[i] += lh[e];
        }
    }

    let mut constrained = Vec::new();
    for side in [Side::Left, Side::Right] {
        let bc = spec.bc(side);
        let (cell, node) = match side {
            Side::Left => (0, 0),
            Side::Right => (mesh.cell_count() - 1, p),
        };
        let s = dofs.scalar_index(Field::V, cell, node);
        match bc.kind {
            BoundaryKind::Dirichlet => sys.rhs[s] -= bc.value * side.normal(),
            BoundaryKind::Neumann => constrained.push((s, -bc.value)),
        }
    }
    for &(s, v) in &constrained {
        constrain(&mut sys, s, v);
    }
    let constrained: Vec<usize> = constrained.iter().map(|&(s, _)| s).collect();

    let real_saddle = spec.kind == ScalarKind::Real && spec.unit_diffusion;
    let blocks = real_saddle.then(|| extract_blocks(&sys, p, mesh.cell_count()));
    Ok(finish(
        sys,
        dofs,
        spec.kind,
        mesh.clone(),
        &constrained,
        blocks,
        real_saddle,
    ))
}

fn extract_blocks(sys: &ComplexSystem, p: usize, cells: usize) -> MixedBlocks {
    let nv = p * cells + 1;
    let a = &sys.matrix;
    let mut m = BandedMatrix::zeros(nv, p, p);
    for k in 0..nv {
        let (lo, hi) = m.row_range(k);
        for kk in lo..hi {
            m.set(k, kk, a.get(2 * k, 2 * kk).re);
        }
    }
    let mut b_local = Vec::with_capacity(cells * (p + 1) * p);
    for c in 0..cells {
        for i in 0..=p {
            for j in 0..p {
                b_local.push(a.get(2 * (c * p + i), 2 * (c * p + j) + 1).re);
            }
        }
    }
    let g = (0..nv).map(|k| sys.rhs[2 * k].re).collect();
    let h = (0..nv - 1).map(|e| sys.rhs[2 * e + 1].re).collect();
    MixedBlocks {
        degree: p,
        cells,
        m,
        b_local,
        g,
        h,
    }
}
