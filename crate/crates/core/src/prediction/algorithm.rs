use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::model::{alpha_r, beta_r, beta_t, fit_alpha_t, predict_opt, ErrorModel};
use super::sweep::{brute_force_sweep, Discretization, Solved, StopRule, SweepResult};
use crate::assembly::{DirichletMode, Flavor};
use crate::error::{FemError, Result};
use crate::error_analysis::{convergence_order, default_scheme, error_refined, ScalingScheme};
use crate::problem::{ProblemSpec, Variable};
use crate::solvers::SolverChoice;

/// Tunables of the normalization and prediction algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmDefaults {
    /// Overrides `REF_min = 9 - p` (`p < 6`), 4 otherwise.
    pub ref_min: Option<u32>,
    pub c_s: f64,
    /// Overrides `c_r` = 0.9 (`p < 4`), 0.7 (`p < 10`), 0.5 otherwise.
    pub c_r: Option<f64>,
    pub n_max: usize,
    /// `alpha_R` for u, u_x, u_xx.
    pub alpha_r: [f64; 3],
    /// `beta_R` for standard and mixed FEM.
    pub beta_r: [f64; 2],
    pub solver: SolverChoice,
    pub dirichlet: DirichletMode,
    /// Overrides the variable-dependent default scheme.
    pub scheme: Option<ScalingScheme>,
}

impl Default for AlgorithmDefaults {
    fn default() -> Self {
        AlgorithmDefaults {
            ref_min: None,
            c_s: 0.001,
            c_r: None,
            n_max: 100_000_000,
            alpha_r: [
                alpha_r(Variable::U),
                alpha_r(Variable::Ux),
                alpha_r(Variable::Uxx),
            ],
            beta_r: [beta_r(Flavor::Standard), beta_r(Flavor::Mixed)],
            solver: SolverChoice::Direct,
            dirichlet: DirichletMode::Strong,
            scheme: None,
        }
    }
}

impl AlgorithmDefaults {
    pub fn ref_min_for(&self, p: usize) -> u32 {
        self.ref_min.unwrap_or(if p < 6 { 9 - p as u32 } else { 4 })
    }

    pub fn c_r_for(&self, p: usize) -> f64 {
        self.c_r.unwrap_or(if p < 4 {
            0.9
        } else if p < 10 {
            0.7
        } else {
            0.5
        })
    }

    pub fn alpha_r_for(&self, var: Variable) -> f64 {
        self.alpha_r[var.derivative_order()]
    }

    pub fn beta_r_for(&self, flavor: Flavor) -> f64 {
        match flavor {
            Flavor::Standard => self.beta_r[0],
            Flavor::Mixed => self.beta_r[1],
        }
    }

    pub fn scheme_for(&self, flavor: Flavor, var: Variable) -> ScalingScheme {
        self.scheme.unwrap_or_else(|| default_scheme(flavor, var))
    }
}

/// Norm estimates produced by the normalization step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub u_norm: f64,
    pub ux_norm: f64,
    /// Finest level solved.
    pub level: u32,
    pub elapsed_secs: f64,
}

/// Refines from `REF_min(p_min)` until the relative change of `||var_h||_2`
/// between consecutive meshes drops below `c_s`. Returns the accepted norm
/// and the level at which it was accepted.
pub fn normalization(
    spec: &ProblemSpec,
    flavor: Flavor,
    var: Variable,
    p_min: usize,
    defaults: &AlgorithmDefaults,
) -> Result<(f64, u32)> {
    let (norms, level) = normalize_many(spec, flavor, &[var], p_min, defaults)?;
    Ok((norms[0], level))
}

/// Norms of `u` and `u_x`, as needed by every scaling scheme.
pub fn normalize(
    spec: &ProblemSpec,
    flavor: Flavor,
    p_min: usize,
    defaults: &AlgorithmDefaults,
) -> Result<Normalization> {
    let start = Instant::now();
    let (norms, level) =
        normalize_many(spec, flavor, &[Variable::U, Variable::Ux], p_min, defaults)?;
    Ok(Normalization {
        u_norm: norms[0],
        ux_norm: norms[1],
        level,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

fn normalize_many(
    spec: &ProblemSpec,
    flavor: Flavor,
    vars: &[Variable],
    p_min: usize,
    defaults: &AlgorithmDefaults,
) -> Result<(Vec<f64>, u32)> {
    let disc = Discretization::new(flavor, p_min)
        .with_solver(defaults.solver)
        .with_dirichlet(defaults.dirichlet);
    let norms_at = |level: u32| -> Result<(Vec<f64>, usize)> {
        let s = disc.solve(spec, level)?;
        let norms = vars
            .iter()
            .map(|&v| s.field(v).map(|f| f.l2_norm()))
            .collect::<Result<Vec<f64>>>()?;
        Ok((norms, s.dof_count()))
    };
    let mut level = defaults.ref_min_for(p_min);
    let (mut prev, _) = norms_at(level)?;
    let mut accepted: Vec<Option<f64>> = vec![None; vars.len()];
    loop {
        level += 1;
        let (cur, n) = norms_at(level)?;
        for (k, acc) in accepted.iter_mut().enumerate() {
            if acc.is_none() && cur[k] > 0.0 && ((cur[k] - prev[k]) / cur[k]).abs() < defaults.c_s {
                *acc = Some(cur[k]);
            }
        }
        if accepted.iter().all(Option::is_some) {
            return Ok((accepted.into_iter().map(Option::unwrap).collect(), level));
        }
        if n >= defaults.n_max {
            let k = accepted.iter().position(Option::is_none).unwrap_or(0);
            return Err(FemError::NormalizationFailed {
                last_norm: cur[k],
                level,
            });
        }
        prev = cur;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictionStatus {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "hit_N_max")]
    HitNMax,
    #[serde(rename = "round-off_before_asymptote")]
    RoundOffBeforeAsymptote,
}

impl PredictionStatus {
    pub fn name(self) -> &'static str {
        match self {
            PredictionStatus::Converged => "converged",
            PredictionStatus::HitNMax => "hit_N_max",
            PredictionStatus::RoundOffBeforeAsymptote => "round-off_before_asymptote",
        }
    }
}

/// Smallest refinement level whose DoF count reaches `N_opt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshChoice {
    pub level: u32,
    pub n_h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub flavor: Flavor,
    pub p: usize,
    pub var: Variable,
    pub scheme: ScalingScheme,
    /// Physical value of one unit of the scaled variable.
    pub scale: f64,
    pub n_c: Option<usize>,
    pub e_c: Option<f64>,
    pub alpha_t: Option<f64>,
    pub beta_t: f64,
    pub alpha_r: f64,
    pub beta_r: f64,
    pub n_opt: Option<f64>,
    pub n_opt_mesh: Option<MeshChoice>,
    /// Predicted minimum in scaled units; for a non-converged run, the
    /// smallest observed estimate instead.
    pub e_min: f64,
    pub reachable: bool,
    pub status: PredictionStatus,
    pub refinements_used: usize,
    /// `(N_h, E~_h)` pairs seen by the loop.
    pub history: Vec<(usize, f64)>,
    pub elapsed_secs: f64,
}

impl PredictionResult {
    pub fn model(&self) -> Option<ErrorModel> {
        self.alpha_t
            .and_then(|a| ErrorModel::new(a, self.beta_t, self.alpha_r, self.beta_r).ok())
    }
}

pub fn mesh_for(disc: &Discretization, spec: &ProblemSpec, n_opt: f64) -> MeshChoice {
    let mut level = 0;
    while (disc.dof_count(spec, level) as f64) < n_opt && level < crate::mesh_basis::MAX_REFINEMENT
    {
        level += 1;
    }
    MeshChoice {
        level,
        n_h: disc.dof_count(spec, level),
    }
}

/// The scaled discretization used by the prediction loop for one variable.
pub fn prediction_discretization(
    flavor: Flavor,
    p: usize,
    var: Variable,
    norms: &Normalization,
    defaults: &AlgorithmDefaults,
) -> Discretization {
    Discretization::new(flavor, p)
        .with_solver(defaults.solver)
        .with_dirichlet(defaults.dirichlet)
        .with_scaling(
            defaults.scheme_for(flavor, var),
            norms.u_norm,
            norms.ux_norm,
        )
}

/// Refine from `REF_min` until the observed rate of the refined estimator
/// reaches `beta_T c_r`, then fit the truncation offset at that anchor and
/// return the closed-form optimum.
pub fn prediction_loop(
    spec: &ProblemSpec,
    flavor: Flavor,
    p: usize,
    var: Variable,
    tol_var: f64,
    norms: &Normalization,
    defaults: &AlgorithmDefaults,
) -> Result<PredictionResult> {
    let start = Instant::now();
    let bt = beta_t(flavor, p, var).ok_or_else(|| FemError::VariableUnavailable {
        var: var.name().into(),
        flavor: flavor.name().into(),
        p,
    })?;
    let disc = prediction_discretization(flavor, p, var, norms, defaults);
    let scale = match (disc.scheme, flavor, var) {
        (ScalingScheme::None, _, _) => 1.0,
        (ScalingScheme::M1, Flavor::Mixed, Variable::Ux | Variable::Uxx) => norms.ux_norm,
        _ => norms.u_norm,
    };
    let (ar, br) = (defaults.alpha_r_for(var), defaults.beta_r_for(flavor));
    let threshold = bt * defaults.c_r_for(p);

    let mut level = defaults.ref_min_for(p);
    let mut coarse: Solved = disc.solve(spec, level)?;
    let mut solves = 1;
    let mut history: Vec<(usize, f64)> = Vec::new();
    let mut status = PredictionStatus::HitNMax;
    let mut anchor = None;
    let mut rising = 0;
    loop {
        let fine = disc.solve(spec, level + 1)?;
        solves += 1;
        let e = error_refined(&coarse.field(var)?, &fine.field(var)?)?.value;
        let n_h = coarse.dof_count();
        history.push((n_h, e));
        if e <= ar * (n_h as f64).powf(br) {
            status = PredictionStatus::RoundOffBeforeAsymptote;
            break;
        }
        if history.len() >= 2 {
            let e2h = history[history.len() - 2].1;
            if let Ok(q) = convergence_order(e2h, e) {
                if q >= threshold {
                    anchor = Some((n_h, e));
                    status = PredictionStatus::Converged;
                    break;
                }
                // Already on the floor: the estimate grows instead of shrinking.
                rising = if q < 0.0 { rising + 1 } else { 0 };
                if rising >= 2 {
                    status = PredictionStatus::RoundOffBeforeAsymptote;
                    break;
                }
            }
        }
        if fine.dof_count() >= defaults.n_max {
            break;
        }
        coarse = fine;
        level += 1;
    }

    let mut result = PredictionResult {
        flavor,
        p,
        var,
        scheme: disc.scheme,
        scale,
        n_c: None,
        e_c: None,
        alpha_t: None,
        beta_t: bt,
        alpha_r: ar,
        beta_r: br,
        n_opt: None,
        n_opt_mesh: None,
        e_min: history.iter().map(|h| h.1).fold(f64::INFINITY, f64::min),
        reachable: false,
        status,
        refinements_used: solves,
        history,
        elapsed_secs: 0.0,
    };
    if let Some((n_c, e_c)) = anchor {
        let alpha_t = fit_alpha_t(e_c, n_c as f64, bt)?;
        let model = ErrorModel::new(alpha_t, bt, ar, br)?;
        let (n_opt, e_min) = predict_opt(&model);
        result.n_c = Some(n_c);
        result.e_c = Some(e_c);
        result.alpha_t = Some(alpha_t);
        result.n_opt = Some(n_opt);
        result.n_opt_mesh = Some(mesh_for(&disc, spec, n_opt));
        result.e_min = e_min;
    }
    result.reachable = result.e_min <= tol_var;
    result.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Normalization followed by prediction for every requested variable.
pub fn predict_all(
    spec: &ProblemSpec,
    flavor: Flavor,
    degrees: &[usize],
    vars: &[Variable],
    tol_var: f64,
    defaults: &AlgorithmDefaults,
) -> Result<(Normalization, Vec<PredictionResult>)> {
    let p_min = *degrees
        .iter()
        .min()
        .ok_or_else(|| FemError::arg("empty degree set"))?;
    let norms = normalize(spec, flavor, p_min, defaults)?;
    let mut out = Vec::new();
    for &p in degrees {
        for &var in vars {
            if beta_t(flavor, p, var).is_some() {
                out.push(prediction_loop(
                    spec, flavor, p, var, tol_var, &norms, defaults,
                )?);
            }
        }
    }
    Ok((norms, out))
}

/// Per (flavor, p), in first-seen order: whether every predicted variable
/// reaches its tolerance.
pub fn reachability_verdicts(results: &[PredictionResult]) -> Vec<(Flavor, usize, bool)> {
    let mut out: Vec<(Flavor, usize, bool)> = Vec::new();
    for r in results {
        match out.iter_mut().find(|v| v.0 == r.flavor && v.1 == r.p) {
            Some(v) => v.2 &= r.reachable,
            None => out.push((r.flavor, r.p, r.reachable)),
        }
    }
    out
}

/// Brute-force refinement with the same scaling the prediction uses.
pub fn brute_force_for(
    spec: &ProblemSpec,
    flavor: Flavor,
    p: usize,
    var: Variable,
    norms: &Normalization,
    defaults: &AlgorithmDefaults,
    stop: &StopRule,
) -> Result<SweepResult> {
    let disc = prediction_discretization(flavor, p, var, norms, defaults);
    brute_force_sweep(spec, &disc, &[var], stop)
}

/// One solve at the predicted mesh (the `+` in PRED+), clamped to the
/// finest mesh within `N_max`. Returns the level used, its wall time and
/// the exact error there when an exact solution exists.
pub fn time_optimal_solve(
    spec: &ProblemSpec,
    result: &PredictionResult,
    norms: &Normalization,
    defaults: &AlgorithmDefaults,
) -> Result<Option<(u32, Duration, f64)>> {
    let Some(mesh) = result.n_opt_mesh else {
        return Ok(None);
    };
    let disc = prediction_discretization(result.flavor, result.p, result.var, norms, defaults);
    let mut level = mesh.level;
    while level > 0 && disc.dof_count(spec, level) > defaults.n_max {
        level -= 1;
    }
    let solved = disc.solve(spec, level)?;
    let field = solved.field(result.var)?;
    let err = match &spec.exact {
        Some(_) => crate::error_analysis::error_exact(&field, spec)?.value,
        None => f64::NAN,
    };
    Ok(Some((level, solved.elapsed, err)))
}
