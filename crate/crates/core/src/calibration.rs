//! Floor fits on brute-force curves and the solver, magnitude and boundary
//! sensitivity studies built on them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::Flavor;
use crate::error::{FemError, Result};
use crate::error_analysis::{default_scheme, ErrorCurve, ScalingScheme};
use crate::prediction::{
    brute_force_sweep, is_available, normalize, AlgorithmDefaults, Discretization, StopRule,
};
use crate::problem::{catalog, ProblemSpec, Variable};
use crate::report::{csv_document, curve_csv, fmt_opt, write_file};
use crate::solvers::{InnerSolver, SolverChoice};

/// Least-squares fit of `log E = log alpha_R + beta_R log N` on the
/// records after the curve minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorFit {
    pub alpha_r_hat: f64,
    pub beta_r_hat: f64,
    pub point_count: usize,
    /// RMS residual in `log10 E`.
    pub residual: f64,
}

impl FloorFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.alpha_r_hat * n.powf(self.beta_r_hat)
    }
}

fn floor_points(curve: &ErrorCurve) -> Result<Vec<(f64, f64)>> {
    let k = curve
        .minimum_index()
        .ok_or(FemError::InsufficientFloorPoints { found: 0 })?;
    let pts: Vec<(f64, f64)> = curve.records[k + 1..]
        .iter()
        .filter(|r| r.value > 0.0)
        .map(|r| ((r.n_h as f64).ln(), r.value.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(FemError::InsufficientFloorPoints { found: pts.len() });
    }
    Ok(pts)
}

pub fn fit_floor(curve: &ErrorCurve) -> Result<FloorFit> {
    let pts = floor_points(curve)?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let beta = sxy / sxx;
    let log_alpha = my - beta * mx;
    if !(beta.is_finite() && log_alpha.is_finite()) {
        return Err(FemError::arg("degenerate floor fit"));
    }
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - log_alpha - beta * p.0).powi(2))
        .sum();
    Ok(FloorFit {
        alpha_r_hat: log_alpha.exp(),
        beta_r_hat: beta,
        point_count: pts.len(),
        residual: (ss / n).sqrt() / std::f64::consts::LN_10,
    })
}

/// Offset with the slope held at `beta_r`: geometric mean of `E / N^beta_r`
/// over the same post-minimum records.
pub fn offset_at_slope(curve: &ErrorCurve, beta_r: f64) -> Result<f64> {
    let pts = floor_points(curve)?;
    let mean = pts.iter().map(|p| p.1 - beta_r * p.0).sum::<f64>() / pts.len() as f64;
    Ok(mean.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Solver,
    Magnitude,
    Boundary,
}

impl SuiteKind {
    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Solver => "solver",
            SuiteKind::Magnitude => "magnitude",
            SuiteKind::Boundary => "boundary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "solver" => Ok(SuiteKind::Solver),
            "magnitude" => Ok(SuiteKind::Magnitude),
            "boundary" => Ok(SuiteKind::Boundary),
            other => Err(FemError::arg(format!(
                "unknown suite '{other}' (expected solver, magnitude or boundary)"
            ))),
        }
    }
}

/// Coefficient grid of the magnitude study for case `k`.
pub fn magnitude_grid(case: usize) -> Result<Vec<f64>> {
    match case {
        1 | 4 => Ok(vec![1e-2, 1e-1, 1.0, 1e1, 1e2]),
        2 | 3 | 5 => Ok(vec![1e-4, 1e-2, 1.0, 1e2, 1e4]),
        _ => Err(FemError::arg(format!(
            "magnitude case must be 1..5, got {case}"
        ))),
    }
}

pub fn default_degree(flavor: Flavor) -> usize {
    match flavor {
        Flavor::Standard => 2,
        Flavor::Mixed => 4,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub kind: SuiteKind,
    /// Problem of the solver and boundary studies.
    pub problem: String,
    /// Case number of the magnitude study.
    pub case: usize,
    /// Overrides the case's default coefficient grid.
    pub coefficients: Option<Vec<f64>>,
    /// Fixed scheme; `None` means the per-variable default for the
    /// magnitude study and no scaling elsewhere.
    pub scheme: Option<ScalingScheme>,
    pub flavors: Vec<Flavor>,
    /// Per-flavor default when `None`.
    pub degrees: Option<Vec<usize>>,
    pub vars: Vec<Variable>,
    pub tol_prms: Vec<f64>,
    pub n_max: usize,
    pub rise_streak: usize,
}

impl SuiteConfig {
    pub fn new(kind: SuiteKind) -> Self {
        SuiteConfig {
            kind,
            problem: "bench-poisson".into(),
            case: 1,
            coefficients: None,
            scheme: None,
            flavors: vec![Flavor::Standard],
            degrees: None,
            vars: vec![Variable::U],
            tol_prms: vec![1e-10, 1e-4],
            n_max: match kind {
                SuiteKind::Solver => 70_000,
                _ => 2_000_000,
            },
            rise_streak: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub config: String,
    pub flavor: Flavor,
    pub p: usize,
    pub var: Variable,
    pub scheme: ScalingScheme,
    pub curve: ErrorCurve,
    pub fit: Option<FloorFit>,
    /// Offset at the nominal round-off slope of the flavor.
    pub alpha_r_nominal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub kind: SuiteKind,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn row(&self, config: &str, flavor: Flavor, var: Variable) -> Option<&SuiteRow> {
        self.rows
            .iter()
            .find(|r| r.config == config && r.flavor == flavor && r.var == var)
    }

    /// One curve CSV per row, named `<suite>-<config>_<flavor>_<p>_<var>.csv`.
    pub fn write_csvs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for r in &self.rows {
            let name = format!(
                "{}-{}_{}_{}_{}.csv",
                self.kind.name(),
                r.config,
                r.flavor.name(),
                r.p,
                r.var.name()
            );
            let path = dir.join(name);
            write_file(&path, &curve_csv(&r.curve)?)?;
            out.push(path);
        }
        Ok(out)
    }

    pub fn summary_csv(&self) -> Result<Vec<u8>> {
        csv_document(
            &[
                "config",
                "flavor",
                "p",
                "var",
                "scheme",
                "N_min",
                "E_min",
                "alpha_R_hat",
                "beta_R_hat",
                "points",
                "residual",
                "alpha_R_nominal",
            ],
            self.rows.iter().map(|r| {
                let min = r.curve.minimum();
                vec![
                    r.config.clone(),
                    r.flavor.name().to_string(),
                    r.p.to_string(),
                    r.var.name().to_string(),
                    r.scheme.name().to_string(),
                    min.map(|m| m.n_h.to_string()).unwrap_or_default(),
                    fmt_opt(min.map(|m| m.value)),
                    fmt_opt(r.fit.map(|f| f.alpha_r_hat)),
                    fmt_opt(r.fit.map(|f| f.beta_r_hat)),
                    r.fit.map(|f| f.point_count.to_string()).unwrap_or_default(),
                    fmt_opt(r.fit.map(|f| f.residual)),
                    fmt_opt(r.alpha_r_nominal),
                ]
            }),
        )
    }
}

fn coefficient_label(c: f64) -> String {
    format!("c{c:e}")
}

struct Config {
    label: String,
    spec: ProblemSpec,
    solver: SolverChoice,
}

fn solver_for(flavor: Flavor, tol: f64) -> SolverChoice {
    match flavor {
        Flavor::Standard => SolverChoice::Cg { tol },
        Flavor::Mixed => SolverChoice::Schur {
            tol,
            inner: InnerSolver::Direct,
        },
    }
}

pub fn sensitivity_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.flavors.is_empty() || cfg.vars.is_empty() {
        return Err(FemError::arg(
            "suite needs at least one flavor and one variable",
        ));
    }
    let mut rows = Vec::new();
    for &flavor in &cfg.flavors {
        let degrees = cfg
            .degrees
            .clone()
            .unwrap_or_else(|| vec![default_degree(flavor)]);
        let configs = build_configs(cfg, flavor)?;
        for &p in &degrees {
            for c in &configs {
                rows.extend(run_config(cfg, c, flavor, p)?);
            }
        }
    }
    Ok(SuiteReport {
        kind: cfg.kind,
        rows,
    })
}

fn build_configs(cfg: &SuiteConfig, flavor: Flavor) -> Result<Vec<Config>> {
    Ok(match cfg.kind {
        SuiteKind::Solver => {
            let spec = catalog(&cfg.problem, None)?;
            let mut v = vec![Config {
                label: "lu".into(),
                spec: spec.clone(),
                solver: SolverChoice::Direct,
            }];
            for &tol in &cfg.tol_prms {
                v.push(Config {
                    label: format!("cg{tol:e}"),
                    spec: spec.clone(),
                    solver: solver_for(flavor, tol),
                });
            }
            v
        }
        SuiteKind::Magnitude => {
            let grid = match &cfg.coefficients {
                Some(g) => g.clone(),
                None => magnitude_grid(cfg.case)?,
            };
            let name = format!("case{}", cfg.case);
            grid.iter()
                .map(|&c| {
                    Ok(Config {
                        label: coefficient_label(c),
                        spec: catalog(&name, Some(c))?,
                        solver: SolverChoice::Direct,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        SuiteKind::Boundary => {
            let base = cfg.problem.trim_end_matches("-dn");
            vec![
                Config {
                    label: "dd".into(),
                    spec: catalog(base, None)?,
                    solver: SolverChoice::Direct,
                },
                Config {
                    label: "dn".into(),
                    spec: catalog(&format!("{base}-dn"), None)?,
                    solver: SolverChoice::Direct,
                },
            ]
        }
    })
}

fn run_config(cfg: &SuiteConfig, c: &Config, flavor: Flavor, p: usize) -> Result<Vec<SuiteRow>> {
    let vars: Vec<Variable> = cfg
        .vars
        .iter()
        .copied()
        .filter(|&v| is_available(flavor, p, v))
        .collect();
    let scheme_for = |var| match (cfg.scheme, cfg.kind) {
        (Some(s), _) => s,
        (None, SuiteKind::Magnitude) => default_scheme(flavor, var),
        (None, _) => ScalingScheme::None,
    };
    let needs_norms = vars.iter().any(|&v| scheme_for(v) != ScalingScheme::None);
    let (u_norm, v_norm) = if needs_norms {
        let defaults = AlgorithmDefaults::default();
        let n = normalize(&c.spec, flavor, p, &defaults)?;
        (n.u_norm, n.ux_norm)
    } else {
        (1.0, 1.0)
    };
    let stop = StopRule {
        n_max: cfg.n_max,
        rise_streak: cfg.rise_streak,
        min_level: 3,
        ..StopRule::default()
    };
    // Variables sharing a scheme share their solves.
    let mut schemes: Vec<ScalingScheme> = Vec::new();
    for &v in &vars {
        if !schemes.contains(&scheme_for(v)) {
            schemes.push(scheme_for(v));
        }
    }
    let mut rows = Vec::new();
    for scheme in schemes {
        let group: Vec<Variable> = vars
            .iter()
            .copied()
            .filter(|&v| scheme_for(v) == scheme)
            .collect();
        let disc = Discretization::new(flavor, p)
            .with_solver(c.solver)
            .with_scaling(scheme, u_norm, v_norm);
        let sweep = brute_force_sweep(&c.spec, &disc, &group, &stop)?;
        for (var, curve) in sweep.curves {
            let fit = fit_floor(&curve).ok();
            let alpha_r_nominal = offset_at_slope(&curve, crate::prediction::beta_r(flavor)).ok();
            rows.push(SuiteRow {
                config: c.label.clone(),
                flavor,
                p,
                var,
                scheme,
                curve,
                fit,
                alpha_r_nominal,
            });
        }
    }
    rows.sort_by_key(|r| r.var.derivative_order());
    Ok(rows)
}

/// Human-readable floor table, used by the CLI and the report file.
pub fn format_fits(report: &SuiteReport) -> String {
    let mut s = format!(
        "{:<14} {:<8} {:>2} {:<4} {:<6} {:>10} {:>12} {:>12} {:>8} {:>12}\n",
        "config",
        "flavor",
        "p",
        "var",
        "scheme",
        "N_min",
        "E_min",
        "alpha_R",
        "beta_R",
        "alpha_R@nom"
    );
    for r in &report.rows {
        let min = r.curve.minimum();
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        s.push_str(&format!(
            "{:<14} {:<8} {:>2} {:<4} {:<6} {:>10} {:>12} {:>12} {:>8} {:>12}\n",
            r.config,
            r.flavor.name(),
            r.p,
            r.var.name(),
            r.scheme.name(),
            min.map(|m| m.n_h.to_string()).unwrap_or_else(|| "-".into()),
            opt(min.map(|m| m.value)),
            opt(r.fit.map(|f| f.alpha_r_hat)),
            r.fit
                .map(|f| format!("{:.2}", f.beta_r_hat))
                .unwrap_or_else(|| "-".into()),
            opt(r.alpha_r_nominal),
        ));
    }
    s
}

pub fn cpu_identification() -> String {
    std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| std::env::consts::ARCH.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_analysis::{ErrorRecord, Estimator};

    fn curve(points: &[(usize, f64)]) -> ErrorCurve {
        let mut c = ErrorCurve::default();
        for (i, &(n, e)) in points.iter().enumerate() {
            c.push(ErrorRecord {
                refinement_level: i as u32 + 1,
                n_h: n,
                value: e,
                estimator: Estimator::Exact,
                observed_rate: None,
            });
        }
        c
    }

    fn synthetic(alpha: f64, beta: f64) -> ErrorCurve {
        let mut pts = vec![(8, 1.0), (16, 1e-3), (32, 1e-30)];
        for k in 6..12 {
            let n = 1usize << k;
            pts.push((n, alpha * (n as f64).powf(beta)));
        }
        curve(&pts)
    }

    #[test]
    fn recovers_exact_power_law() {
        let f = fit_floor(&synthetic(1e-16, 2.0)).unwrap();
        assert!((f.alpha_r_hat / 1e-16 - 1.0).abs() < 1e-10);
        assert!((f.beta_r_hat - 2.0).abs() < 1e-10);
        assert_eq!(f.point_count, 6);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn minimum_itself_is_excluded() {
        // Minimum at index 2; a point off the line there must not matter.
        let f = fit_floor(&synthetic(3e-17, 1.0)).unwrap();
        assert!((f.beta_r_hat - 1.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_floor_points() {
        let c = curve(&[(8, 1.0), (16, 1e-9), (32, 1e-8), (64, 1e-7)]);
        assert!(matches!(
            fit_floor(&c),
            Err(FemError::InsufficientFloorPoints { found: 2 })
        ));
    }

    #[test]
    fn nominal_offset() {
        let c = synthetic(2e-17, 2.0);
        assert!((offset_at_slope(&c, 2.0).unwrap() / 2e-17 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grids_and_parsing() {
        assert_eq!(magnitude_grid(1).unwrap().len(), 5);
        assert_eq!(magnitude_grid(2).unwrap()[0], 1e-4);
        assert!(magnitude_grid(6).is_err());
        assert_eq!(SuiteKind::parse("boundary").unwrap(), SuiteKind::Boundary);
        assert!(SuiteKind::parse("x").is_err());
    }
}
