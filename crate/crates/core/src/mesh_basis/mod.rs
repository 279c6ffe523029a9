//! Uniform meshes on (0, 1), Lagrange bases on Gauss-Lobatto points and
//! Gauss-Legendre rules. All objects live on the reference cell [0, 1] and
//! are mapped affinely onto physical cells.

mod basis;
mod mesh;
mod quadrature;

pub use basis::{gauss_lobatto_nodes, BasisTable, Continuity, LagrangeBasis, MAX_DEGREE};
pub use mesh::{build_mesh, Mesh, MAX_REFINEMENT};
pub use quadrature::{gauss_legendre_rule, QuadratureRule, MAX_POINTS};

/// Quadrature points per cell used for assembly.
pub fn assembly_points(p: usize) -> usize {
    p + 2
}

/// Quadrature points per cell used for error and norm integration.
pub fn error_points(p: usize) -> usize {
    p + 4
}
