use crate::error::{FemError, Result};

pub const MAX_REFINEMENT: u32 = 40;

/// Uniform mesh of (0, 1) obtained by globally refining a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    refinement_level: u32,
    cell_count: usize,
    h: f64,
}

pub fn build_mesh(refinement_level: u32) -> Result<Mesh> {
    if refinement_level > MAX_REFINEMENT {
        return Err(FemError::arg(format!(
            "refinement level {refinement_level} exceeds the cap of {MAX_REFINEMENT}"
        )));
    }
    Ok(Mesh {
        refinement_level,
        cell_count: 1usize << refinement_level,
        // exact power of two
        h: (-(refinement_level as i32) as f64).exp2(),
    })
}

impl Mesh {
    pub fn refinement_level(&self) -> u32 {
        self.refinement_level
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn vertex(&self, i: usize) -> f64 {
        debug_assert!(i <= self.cell_count);
        i as f64 * self.h
    }

    /// Vertex coordinates, `cell_count + 1` of them.
    pub fn vertices(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.cell_count).map(move |i| self.vertex(i))
    }

    /// Physical coordinate of reference point `xi` in `cell`.
    #[inline]
    pub fn map(&self, cell: usize, xi: f64) -> f64 {
        (cell as f64 + xi) * self.h
    }

    /// Cell containing `x` together with the reference coordinate inside it.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = x / self.h;
        let cell = (s.floor() as isize).clamp(0, self.cell_count as isize - 1) as usize;
        (cell, s - cell as f64)
    }

    pub fn refined(&self) -> Result<Mesh> {
        build_mesh(self.refinement_level + 1)
    }
}
