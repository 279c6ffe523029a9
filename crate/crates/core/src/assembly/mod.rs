//! Discrete systems for the standard and mixed formulations.
//!
//! Everything is assembled in complex arithmetic. Real problems keep the real
//! part; complex problems are split into 2x2 real blocks with the real and
//! imaginary part of each scalar unknown stored next to each other.

mod banded;
mod mixed;
mod split;
mod standard;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FemError, Result};
use crate::error_analysis::ScalingScheme;
use crate::mesh_basis::Mesh;
use crate::problem::ScalarKind;

pub use banded::BandedMatrix;
pub use mixed::{assemble_mixed, MixedBlocks};
pub use split::{recombine, split_complex, ComplexSystem};
pub use standard::assemble_standard;

/// Default penalty for weak Dirichlet imposition.
pub const DEFAULT_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Standard,
    Mixed,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Standard => "standard",
            Flavor::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "standard" | "std" | "sm" => Ok(Flavor::Standard),
            "mixed" | "mm" => Ok(Flavor::Mixed),
            other => Err(FemError::arg(format!(
                "unknown FEM flavor '{other}' (expected standard or mixed)"
            ))),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirichletMode {
    Strong,
    /// Penalty imposition with parameter `rho`.
    Weak(f64),
}

/// Which scalar field a mixed unknown belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// The only field of the standard formulation.
    U,
    /// Mixed flux `v = -u_x`.
    V,
    /// Mixed discontinuous `u`.
    UDisc,
}

/// Global numbering of the unknowns.
///
/// Standard: `cell * p + a` for local node `a` in `0..=p`.
/// Mixed: `v` node `k` sits at `2k` and `u` node `e` at `2e + 1`, with
/// natural numbering `k = cell * p + a`, `e = cell * p + b`. Within a cell
/// this reads `v_0, u_0, v_1, u_1, ..., u_{p-1}, v_p`, which keeps the mixed
/// matrix banded with half-bandwidth `2p`.
///
/// For complex problems scalar index `s` becomes `2s` (real) and `2s + 1`
/// (imaginary).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub flavor: Flavor,
    pub degree: usize,
    pub cells: usize,
    pub complex: bool,
}

impl DofMap {
    pub fn scalar_len(&self) -> usize {
        let m = self.degree * self.cells;
        match self.flavor {
            Flavor::Standard => m + 1,
            Flavor::Mixed => 2 * m + 1,
        }
    }

    /// Number of real unknowns in the solved system.
    pub fn len(&self) -> usize {
        self.scalar_len() * if self.complex { 2 } else { 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scalar index of local node `local` of `field` in `cell`.
    pub fn scalar_index(&self, field: Field, cell: usize, local: usize) -> usize {
        let k = cell * self.degree + local;
        match field {
            Field::U => k,
            Field::V => 2 * k,
            Field::UDisc => 2 * k + 1,
        }
    }

    /// Real unknown holding part `part` (0 = Re, 1 = Im) of scalar `s`.
    pub fn real_index(&self, s: usize, part: usize) -> usize {
        if self.complex {
            2 * s + part
        } else {
            debug_assert_eq!(part, 0);
            s
        }
    }

    /// Number of nodes per cell for a field.
    pub fn local_len(&self, field: Field) -> usize {
        match field {
            Field::U | Field::V => self.degree + 1,
            Field::UDisc => self.degree,
        }
    }
}

/// Unknown divisors introduced by a scaling scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleState {
    pub scheme: ScalingScheme,
    /// The solved `u` coefficients equal the physical ones divided by this.
    pub u_factor: f64,
    /// Same for the mixed flux `v`.
    pub v_factor: f64,
}

impl Default for ScaleState {
    fn default() -> Self {
        ScaleState {
            scheme: ScalingScheme::None,
            u_factor: 1.0,
            v_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: BandedMatrix<f64>,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
    pub scalar_kind: ScalarKind,
    pub mesh: Mesh,
    /// Real indices of identity rows (strongly imposed values).
    pub constrained: Vec<usize>,
    /// Separate `M`, `B`, `G`, `H` for the segregated solver; present only for
    /// real mixed systems with `D = 1`, `r = 0`.
    pub blocks: Option<MixedBlocks>,
    pub scaling: ScaleState,
    pub symmetric: bool,
}

impl LinearSystem {
    pub fn flavor(&self) -> Flavor {
        self.dof_map.flavor
    }

    pub fn degree(&self) -> usize {
        self.dof_map.degree
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Complex scalar values of a real solution vector.
    pub fn scalar_values(&self, x: &[f64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dof_map.len());
        if self.dof_map.complex {
            recombine(x)
        } else {
            x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
        }
    }

    /// `F - A x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.matrix.matvec(x);
        self.rhs.iter().zip(&ax).map(|(f, a)| f - a).collect()
    }
}

/// Turns a complex assembly into the solved real system.
pub(crate) fn finish(
    sys: ComplexSystem,
    dof_map: DofMap,
    kind: ScalarKind,
    mesh: Mesh,
    constrained_scalars: &[usize],
    blocks: Option<MixedBlocks>,
    symmetric: bool,
) -> LinearSystem {
    let (matrix, rhs) = match kind {
        ScalarKind::Real => (
            sys.matrix.real_part(),
            sys.rhs.iter().map(|z| z.re).collect(),
        ),
        ScalarKind::Complex => split_complex(&sys),
    };
    let mut constrained: Vec<usize> = constrained_scalars
        .iter()
        .flat_map(|&s| {
            if dof_map.complex {
                vec![2 * s, 2 * s + 1]
            } else {
                vec![s]
            }
        })
        .collect();
    constrained.sort_unstable();
    constrained.dedup();
    LinearSystem {
        matrix,
        rhs,
        dof_map,
        scalar_kind: kind,
        mesh,
        constrained,
        blocks,
        scaling: ScaleState::default(),
        symmetric,
    }
}

/// Identity-row substitution for a known value at scalar `s`, moving the
/// column into the right-hand side so the matrix stays symmetric.
pub(crate) fn constrain(sys: &mut ComplexSystem, s: usize, value: Complex64) {
    let a = &mut sys.matrix;
    let lo = s.saturating_sub(a.upper());
    let hi = (s + a.lower() + 1).min(a.dim());
    for i in lo..hi {
        if i != s {
            let c = a.get(i, s);
            if c != Complex64::default() {
                sys.rhs[i] -= c * value;
                a.set(i, s, Complex64::default());
            }
        }
    }
    a.set_identity_row(s, Complex64::new(1.0, 0.0));
    sys.rhs[s] = value;
}
