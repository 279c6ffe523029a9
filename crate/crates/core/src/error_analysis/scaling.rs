use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assembly::{Flavor, LinearSystem, ScaleState};
use crate::error::{FemError, Result};
use crate::problem::Variable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingScheme {
    #[serde(rename = "none")]
    None,
    /// Standard FEM: `F / ||u||`.
    S,
    /// Mixed FEM: `B` (and the reaction block) times `||u|| / ||v||`, `G` and `H` over `||v||`.
    M1,
    /// Mixed FEM: `G` and `H` over `||u||`.
    M2,
}

impl ScalingScheme {
    pub fn name(self) -> &'static str {
        match self {
            ScalingScheme::None => "none",
            ScalingScheme::S => "S",
            ScalingScheme::M1 => "M1",
            ScalingScheme::M2 => "M2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "none" | "None" => Ok(ScalingScheme::None),
            "S" | "s" => Ok(ScalingScheme::S),
            "M1" | "m1" => Ok(ScalingScheme::M1),
            "M2" | "m2" => Ok(ScalingScheme::M2),
            other => Err(FemError::arg(format!(
                "unknown scaling scheme '{other}' (expected none, S, M1 or M2)"
            ))),
        }
    }
}

impl fmt::Display for ScalingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// S for standard FEM; M2 for mixed `u`, `u_x`; M1 for mixed `u_xx`.
pub fn default_scheme(flavor: Flavor, var: Variable) -> ScalingScheme {
    match (flavor, var) {
        (Flavor::Standard, _) => ScalingScheme::S,
        (Flavor::Mixed, Variable::Uxx) => ScalingScheme::M1,
        (Flavor::Mixed, _) => ScalingScheme::M2,
    }
}

/// Applies a scaling scheme with norm estimates `u_norm = ||u||_2` and
/// `v_norm = ||v||_2 = ||u_x||_2`. The solved unknowns become the physical
/// ones divided by the factors recorded in `system.scaling`.
pub fn apply_scaling(
    scheme: ScalingScheme,
    mut system: LinearSystem,
    u_norm: f64,
    v_norm: f64,
) -> Result<LinearSystem> {
    let mismatch = |reason: &str| FemError::ScalingMismatch {
        scheme: scheme.name().into(),
        reason: reason.into(),
    };
    if system.scaling.scheme != ScalingScheme::None {
        return Err(mismatch("system is already scaled"));
    }
    let needs_v = scheme == ScalingScheme::M1;
    if scheme != ScalingScheme::None
        && !(u_norm.is_finite()
            && u_norm > 0.0
            && (!needs_v || (v_norm.is_finite() && v_norm > 0.0)))
    {
        return Err(mismatch("scaling factors must be positive"));
    }
    let flavor = system.flavor();
    match (scheme, flavor) {
        (ScalingScheme::None, _) => return Ok(system),
        (ScalingScheme::S, Flavor::Standard) => {
            system.rhs.iter_mut().for_each(|f| *f /= u_norm);
            system.scaling = ScaleState {
                scheme,
                u_factor: u_norm,
                v_factor: 1.0,
            };
        }
        (ScalingScheme::M2, Flavor::Mixed) => {
            system.rhs.iter_mut().for_each(|f| *f /= u_norm);
            if let Some(b) = system.blocks.as_mut() {
                b.g.iter_mut().for_each(|f| *f /= u_norm);
                b.h.iter_mut().for_each(|f| *f /= u_norm);
            }
            system.scaling = ScaleState {
                scheme,
                u_factor: u_norm,
                v_factor: u_norm,
            };
        }
        (ScalingScheme::M1, Flavor::Mixed) => {
            let k = u_norm / v_norm;
            let complex = system.dof_map.complex;
            let n = system.dim();
            for i in 0..n {
                let (lo, hi) = system.matrix.row_range(i);
                for j in lo..hi {
                    let scalar = if complex { j / 2 } else { j };
                    if scalar % 2 == 1 {
                        let v = system.matrix.get(i, j);
                        if v != 0.0 {
                            system.matrix.set(i, j, v * k);
                        }
                    }
                }
            }
            system.rhs.iter_mut().for_each(|f| *f /= v_norm);
            if let Some(b) = system.blocks.as_mut() {
                b.scale_b(k);
                b.g.iter_mut().for_each(|f| *f /= v_norm);
                b.h.iter_mut().for_each(|f| *f /= v_norm);
            }
            system.scaling = ScaleState {
                scheme,
                u_factor: u_norm,
                v_factor: v_norm,
            };
        }
        (_, Flavor::Standard) => return Err(mismatch("scheme applies to the mixed FEM only")),
        (_, Flavor::Mixed) => return Err(mismatch("scheme applies to the standard FEM only")),
    }
    Ok(system)
}
