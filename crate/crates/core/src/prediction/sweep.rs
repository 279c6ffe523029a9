use std::time::{Duration, Instant};

use crate::assembly::{assemble_mixed, assemble_standard, DirichletMode, Flavor, LinearSystem};
use crate::error::Result;
use crate::error_analysis::{
    apply_scaling, error_exact, error_refined, reconstruct, ErrorCurve, FieldView, ScalingScheme,
};
use crate::mesh_basis::{build_mesh, MAX_REFINEMENT};
use crate::problem::{ProblemSpec, Variable};
use crate::solvers::{solve, SolveReport, SolverChoice};

/// Everything needed to turn a problem and a refinement level into a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub flavor: Flavor,
    pub degree: usize,
    pub dirichlet: DirichletMode,
    pub solver: SolverChoice,
    pub scheme: ScalingScheme,
    /// `||u||_2` estimate used by the scaling scheme.
    pub u_norm: f64,
    /// `||u_x||_2` estimate used by M1.
    pub v_norm: f64,
}

impl Discretization {
    pub fn new(flavor: Flavor, degree: usize) -> Self {
        Discretization {
            flavor,
            degree,
            dirichlet: DirichletMode::Strong,
            solver: SolverChoice::Direct,
            scheme: ScalingScheme::None,
            u_norm: 1.0,
            v_norm: 1.0,
        }
    }

    pub fn with_scaling(mut self, scheme: ScalingScheme, u_norm: f64, v_norm: f64) -> Self {
        self.scheme = scheme;
        self.u_norm = u_norm;
        self.v_norm = v_norm;
        self
    }

    pub fn with_solver(mut self, solver: SolverChoice) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_dirichlet(mut self, mode: DirichletMode) -> Self {
        self.dirichlet = mode;
        self
    }

    pub fn assemble(&self, spec: &ProblemSpec, level: u32) -> Result<LinearSystem> {
        let mesh = build_mesh(level)?;
        let sys = match self.flavor {
            Flavor::Standard => assemble_standard(spec, &mesh, self.degree, self.dirichlet)?,
            Flavor::Mixed => assemble_mixed(spec, &mesh, self.degree)?,
        };
        apply_scaling(self.scheme, sys, self.u_norm, self.v_norm)
    }

    pub fn solve(&self, spec: &ProblemSpec, level: u32) -> Result<Solved> {
        let start = Instant::now();
        let system = self.assemble(spec, level)?;
        let report = solve(&system, self.solver)?;
        Ok(Solved {
            system,
            report,
            elapsed: start.elapsed(),
        })
    }

    /// Real unknown count at a level, without assembling.
    pub fn dof_count(&self, spec: &ProblemSpec, level: u32) -> usize {
        let m = self.degree << level;
        let scalar = match self.flavor {
            Flavor::Standard => m + 1,
            Flavor::Mixed => 2 * m + 1,
        };
        if spec.is_complex() {
            2 * scalar
        } else {
            scalar
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub system: LinearSystem,
    pub report: SolveReport,
    /// Assembly plus solve.
    pub elapsed: Duration,
}

impl Solved {
    pub fn field(&self, var: Variable) -> Result<FieldView> {
        reconstruct(&self.report.solution, &self.system, var)
    }

    pub fn level(&self) -> u32 {
        self.system.mesh.refinement_level()
    }

    pub fn dof_count(&self) -> usize {
        self.system.dim()
    }
}

/// When a brute-force sweep stops refining.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub start_level: u32,
    /// Rises are only counted on records at or after this level.
    pub min_level: u32,
    /// Consecutive error increases that end the sweep; 0 disables the rule.
    pub rise_streak: usize,
    pub n_max: usize,
    pub max_level: u32,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            start_level: 1,
            min_level: 0,
            rise_streak: 3,
            n_max: 100_000_000,
            max_level: MAX_REFINEMENT,
        }
    }
}

fn trailing_rises(curve: &ErrorCurve, min_level: u32) -> usize {
    let r = &curve.records;
    let mut k = 0;
    while k + 1 < r.len() {
        let (a, b) = (&r[r.len() - k - 2], &r[r.len() - k - 1]);
        if a.refinement_level < min_level || b.value <= a.value {
            break;
        }
        k += 1;
    }
    k
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub curves: Vec<(Variable, ErrorCurve)>,
    pub elapsed: Duration,
    pub levels_solved: Vec<u32>,
}

impl SweepResult {
    pub fn curve(&self, var: Variable) -> Option<&ErrorCurve> {
        self.curves.iter().find(|(v, _)| *v == var).map(|(_, c)| c)
    }
}

/// Successive global refinement recording the error of each variable, with
/// the exact solution when the problem has one and the refined estimator
/// otherwise. Solves are shared between the variables.
pub fn brute_force_sweep(
    spec: &ProblemSpec,
    disc: &Discretization,
    vars: &[Variable],
    stop: &StopRule,
) -> Result<SweepResult> {
    let start = Instant::now();
    let exact = spec.exact.is_some();
    let mut curves: Vec<(Variable, ErrorCurve)> =
        vars.iter().map(|&v| (v, ErrorCurve::default())).collect();
    let mut prev: Option<Solved> = None;
    let mut levels = Vec::new();
    let mut level = stop.start_level;
    loop {
        if disc.dof_count(spec, level) > stop.n_max.max(1) && !levels.is_empty() {
            break;
        }
        let solved = disc.solve(spec, level)?;
        levels.push(level);
        for (var, curve) in curves.iter_mut() {
            let field = solved.field(*var)?;
            if exact {
                curve.push(error_exact(&field, spec)?);
            } else if let Some(p) = &prev {
                curve.push(error_refined(&p.field(*var)?, &field)?);
            }
        }
        let done = stop.rise_streak > 0
            && curves
                .iter()
                .all(|(_, c)| trailing_rises(c, stop.min_level) >= stop.rise_streak);
        if done || level >= stop.max_level || solved.dof_count() >= stop.n_max {
            break;
        }
        prev = Some(solved);
        level += 1;
    }
    Ok(SweepResult {
        curves,
        elapsed: start.elapsed(),
        levels_solved: levels,
    })
}
