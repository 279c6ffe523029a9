use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::{config, CalibrateArgs, PredictArgs, RunConfig, SweepArgs, ValidateArgs};
use crate::assembly::Flavor;
use crate::calibration::{
    cpu_identification, format_fits, sensitivity_suite, SuiteConfig, SuiteKind,
};
use crate::error::{FemError, Result};
use crate::error_analysis::{default_scheme, Estimator, ScalingScheme};
use crate::prediction::{
    brute_force_sweep, is_available, normalize, predict_all, reachability_verdicts,
    validate as run_validation, Discretization, PredictionResult, StopRule, ValidationRow,
};
use crate::problem::{catalog, describe, ProblemSpec, Variable, CATALOG};
use crate::report::{csv_document, curve_csv, fmt_opt, fmt_real, write_file};

const DEFAULT_N_MAX: usize = 100_000_000;

fn run_label(cfg: &RunConfig) -> String {
    match cfg.coef {
        Some(c) => format!("{}-c{c:e}", cfg.problem),
        None => cfg.problem.clone(),
    }
}

/// Drops unavailable (flavor, p, var) combinations with a warning.
fn available_vars(flavor: Flavor, p: usize, vars: &[Variable]) -> Vec<Variable> {
    vars.iter()
        .copied()
        .filter(|&v| {
            let ok = is_available(flavor, p, v);
            if !ok {
                eprintln!("warning: {v} is not available for {flavor} FEM with p = {p}; skipped");
            }
            ok
        })
        .collect()
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn scheme_for(cfg: &RunConfig, flavor: Flavor, var: Variable) -> ScalingScheme {
    match cfg.scheme {
        None => ScalingScheme::None,
        Some(None) => default_scheme(flavor, var),
        Some(Some(s)) => s,
    }
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let cfg = RunConfig::from_common(&a.common, "standard", "u", DEFAULT_N_MAX)?;
    let spec = catalog(&cfg.problem, cfg.coef)?;
    let degrees = cfg.degrees_or("2")?;
    let dir = out_dir(&cfg);
    let label = run_label(&cfg);
    let stop = StopRule {
        min_level: 3,
        rise_streak: a.rise_streak,
        n_max: cfg.n_max,
        ..StopRule::default()
    };
    let estimator = if spec.exact.is_some() {
        Estimator::Exact
    } else {
        Estimator::Refined
    };
    println!("problem {} ({:?} estimator)", spec.label, estimator);
    println!(
        "{:<8} {:>2} {:<4} {:<6} {:>4} {:>10} {:>12}  file",
        "fem", "p", "var", "scheme", "REF", "N_min", "E_min"
    );
    for &flavor in &cfg.flavors {
        for &p in &degrees {
            let vars = available_vars(flavor, p, &cfg.vars);
            let mut schemes: Vec<ScalingScheme> = Vec::new();
            for &v in &vars {
                let s = scheme_for(&cfg, flavor, v);
                if !schemes.contains(&s) {
                    schemes.push(s);
                }
            }
            for scheme in schemes {
                let group: Vec<Variable> = vars
                    .iter()
                    .copied()
                    .filter(|&v| scheme_for(&cfg, flavor, v) == scheme)
                    .collect();
                let (u_norm, v_norm) = if scheme == ScalingScheme::None {
                    (1.0, 1.0)
                } else {
                    let defaults = crate::prediction::AlgorithmDefaults {
                        n_max: cfg.n_max,
                        solver: cfg.solver,
                        dirichlet: cfg.dirichlet,
                        ..Default::default()
                    };
                    let n = normalize(&spec, flavor, p, &defaults)?;
                    (n.u_norm, n.ux_norm)
                };
                let disc = Discretization::new(flavor, p)
                    .with_solver(cfg.solver)
                    .with_dirichlet(cfg.dirichlet)
                    .with_scaling(scheme, u_norm, v_norm);
                let result = brute_force_sweep(&spec, &disc, &group, &stop)?;
                for (var, curve) in &result.curves {
                    let name = format!("sweep_{label}_{flavor}_{p}_{var}.csv");
                    let path = dir.join(&name);
                    write_file(&path, &curve_csv(curve)?)?;
                    let min = curve.minimum();
                    println!(
                        "{:<8} {:>2} {:<4} {:<6} {:>4} {:>10} {:>12}  {}",
                        flavor.name(),
                        p,
                        var.name(),
                        scheme.name(),
                        min.map(|m| m.refinement_level.to_string())
                            .unwrap_or_default(),
                        min.map(|m| m.n_h.to_string()).unwrap_or_default(),
                        min.map(|m| format!("{:.3e}", m.value)).unwrap_or_default(),
                        path.display()
                    );
                }
            }
        }
    }
    Ok(())
}

/// JSON form of one prediction.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionJson {
    pub problem: String,
    pub fem: Flavor,
    pub p: usize,
    pub var: Variable,
    pub scheme: ScalingScheme,
    #[serde(rename = "N_c")]
    pub n_c: Option<usize>,
    #[serde(rename = "E_c")]
    pub e_c: Option<f64>,
    #[serde(rename = "alpha_T")]
    pub alpha_t: Option<f64>,
    #[serde(rename = "beta_T")]
    pub beta_t: f64,
    #[serde(rename = "alpha_R")]
    pub alpha_r: f64,
    #[serde(rename = "beta_R")]
    pub beta_r: f64,
    #[serde(rename = "N_opt_real")]
    pub n_opt_real: Option<f64>,
    #[serde(rename = "N_opt_mesh")]
    pub n_opt_mesh: Option<usize>,
    #[serde(rename = "REF_opt")]
    pub ref_opt: Option<u32>,
    #[serde(rename = "E_min")]
    pub e_min: f64,
    pub reachable: bool,
    pub status: crate::prediction::PredictionStatus,
    pub refinements_used: usize,
}

pub fn prediction_json(problem: &str, r: &PredictionResult) -> PredictionJson {
    PredictionJson {
        problem: problem.to_string(),
        fem: r.flavor,
        p: r.p,
        var: r.var,
        scheme: r.scheme,
        n_c: r.n_c,
        e_c: r.e_c,
        alpha_t: r.alpha_t,
        beta_t: r.beta_t,
        alpha_r: r.alpha_r,
        beta_r: r.beta_r,
        n_opt_real: r.n_opt,
        n_opt_mesh: r.n_opt_mesh.map(|m| m.n_h),
        ref_opt: r.n_opt_mesh.map(|m| m.level),
        e_min: r.e_min,
        reachable: r.reachable,
        status: r.status,
        refinements_used: r.refinements_used,
    }
}

fn prediction_table(results: &[PredictionResult], tol: f64) -> String {
    let mut s = format!(
        "{:<8} {:>2} {:<4} {:<6} {:>9} {:>11} {:>12} {:>10} {:>11} {:>9}  status\n",
        "fem", "p", "var", "scheme", "N_c", "E_c", "N_opt", "N_mesh", "E_min", "reachable"
    );
    for r in results {
        let opt =
            |x: Option<f64>, f: &dyn Fn(f64) -> String| x.map(f).unwrap_or_else(|| "-".into());
        s.push_str(&format!(
            "{:<8} {:>2} {:<4} {:<6} {:>9} {:>11} {:>12} {:>10} {:>11} {:>9}  {}\n",
            r.flavor.name(),
            r.p,
            r.var.name(),
            r.scheme.name(),
            r.n_c.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
            opt(r.e_c, &|x| format!("{x:.3e}")),
            opt(r.n_opt, &|x| format!("{x:.1}")),
            r.n_opt_mesh
                .map(|m| m.n_h.to_string())
                .unwrap_or_else(|| "-".into()),
            format!("{:.3e}", r.e_min),
            if r.reachable { "yes" } else { "no" },
            r.status.name()
        ));
    }
    for (flavor, p, ok) in reachability_verdicts(results) {
        s.push_str(&format!(
            "{flavor} p={p}: tol {tol:e} reachable by all predicted variables: {}\n",
            if ok { "yes" } else { "no" }
        ));
    }
    s
}

fn run_predictions(
    cfg: &RunConfig,
    a: &PredictArgs,
    spec: &ProblemSpec,
) -> Result<Vec<PredictionResult>> {
    let degrees = cfg.degrees_or("2")?;
    let defaults = cfg.defaults(a)?;
    let mut results = Vec::new();
    for &flavor in &cfg.flavors {
        for &p in &degrees {
            available_vars(flavor, p, &cfg.vars);
        }
        let (_, rs) = predict_all(spec, flavor, &degrees, &cfg.vars, a.tol, &defaults)?;
        results.extend(rs);
    }
    Ok(results)
}

fn check_format(f: &str) -> Result<bool> {
    match f {
        "table" => Ok(false),
        "json" => Ok(true),
        other => Err(FemError::arg(format!(
            "unknown format '{other}' (table or json)"
        ))),
    }
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let cfg = RunConfig::from_common(&a.common, "standard", "u", DEFAULT_N_MAX)?;
    let json = check_format(&a.format)?;
    let spec = catalog(&cfg.problem, cfg.coef)?;
    let results = run_predictions(&cfg, a, &spec)?;
    let label = run_label(&cfg);
    let records: Vec<PredictionJson> = results.iter().map(|r| prediction_json(&label, r)).collect();
    let text = serde_json::to_string_pretty(&records).map_err(|e| FemError::arg(e.to_string()))?;
    if let Some(dir) = &cfg.out {
        write_file(&dir.join(format!("predict_{label}.json")), text.as_bytes())?;
    }
    let mut stdout = std::io::stdout().lock();
    if json {
        writeln!(stdout, "{text}")?;
    } else {
        write!(stdout, "{}", prediction_table(&results, a.tol))?;
    }
    Ok(())
}

fn validation_csv(rows: &[ValidationRow]) -> Result<Vec<u8>> {
    csv_document(
        &[
            "fem",
            "p",
            "var",
            "status",
            "E_min_pred",
            "N_opt_pred",
            "N_mesh_pred",
            "E_min_bf",
            "N_opt_bf",
            "REF_bf",
        ],
        rows.iter().map(|r| {
            let m = r.bf_minimum();
            vec![
                r.prediction.flavor.name().to_string(),
                r.prediction.p.to_string(),
                r.prediction.var.name().to_string(),
                r.prediction.status.name().to_string(),
                fmt_real(r.prediction.e_min),
                fmt_opt(r.prediction.n_opt),
                r.prediction
                    .n_opt_mesh
                    .map(|m| m.n_h.to_string())
                    .unwrap_or_default(),
                fmt_opt(m.map(|m| m.value)),
                m.map(|m| m.n_h.to_string()).unwrap_or_default(),
                m.map(|m| m.refinement_level.to_string())
                    .unwrap_or_default(),
            ]
        }),
    )
}

fn timing_csv(rows: &[ValidationRow]) -> Result<Vec<u8>> {
    csv_document(
        &["fem", "p", "var", "t_pred", "t_pred_plus", "t_bf", "saved"],
        rows.iter().map(|r| {
            vec![
                r.prediction.flavor.name().to_string(),
                r.prediction.p.to_string(),
                r.prediction.var.name().to_string(),
                fmt_real(r.t_pred),
                fmt_real(r.t_pred_plus),
                fmt_real(r.t_bf),
                fmt_real(r.saved()),
            ]
        }),
    )
}

pub fn validate(a: &ValidateArgs) -> Result<()> {
    let p = &a.predict;
    let cfg = RunConfig::from_common(&p.common, "both", "all", DEFAULT_N_MAX)?;
    let spec = catalog(&cfg.problem, cfg.coef)?;
    let degrees = cfg.degrees_or("1..5")?;
    let defaults = cfg.defaults(p)?;
    let bf_n_max = a
        .bf_n_max
        .as_deref()
        .map(config::parse_count)
        .transpose()?
        .unwrap_or(cfg.n_max);
    let mut rows = Vec::new();
    for &flavor in &cfg.flavors {
        for &deg in &degrees {
            available_vars(flavor, deg, &cfg.vars);
        }
        rows.extend(run_validation(
            &spec, flavor, &degrees, &cfg.vars, p.tol, &defaults, bf_n_max,
        )?);
    }
    println!(
        "problem {}  tol_var {:e}  BF cap {bf_n_max}",
        spec.label, p.tol
    );
    println!(
        "{:<8} {:>2} {:<4} {:>11} {:>11} {:>10} {:>10}  status",
        "fem", "p", "var", "E_min pred", "E_min BF", "N_opt pred", "N_opt BF"
    );
    for r in &rows {
        let m = r.bf_minimum();
        println!(
            "{:<8} {:>2} {:<4} {:>11} {:>11} {:>10} {:>10}  {}",
            r.prediction.flavor.name(),
            r.prediction.p,
            r.prediction.var.name(),
            format!("{:.3e}", r.prediction.e_min),
            m.map(|m| format!("{:.3e}", m.value))
                .unwrap_or_else(|| "-".into()),
            r.prediction
                .n_opt
                .map(|n| format!("{n:.0}"))
                .unwrap_or_else(|| "-".into()),
            m.map(|m| m.n_h.to_string()).unwrap_or_else(|| "-".into()),
            r.prediction.status.name()
        );
    }
    let preds: Vec<PredictionResult> = rows.iter().map(|r| r.prediction.clone()).collect();
    for (flavor, deg, ok) in reachability_verdicts(&preds) {
        println!(
            "{flavor} p={deg}: tol {:e} reachable by all predicted variables: {}",
            p.tol,
            if ok { "yes" } else { "no" }
        );
    }
    println!();
    println!("timing [s]");
    println!(
        "{:<8} {:>2} {:<4} {:>10} {:>10} {:>10} {:>8}",
        "fem", "p", "var", "PRED", "PRED+", "BF", "saved"
    );
    for r in &rows {
        println!(
            "{:<8} {:>2} {:<4} {:>10.4} {:>10.4} {:>10.4} {:>7.1}%",
            r.prediction.flavor.name(),
            r.prediction.p,
            r.prediction.var.name(),
            r.t_pred,
            r.t_pred_plus,
            r.t_bf,
            100.0 * r.saved()
        );
    }
    if let Some(dir) = &cfg.out {
        let label = run_label(&cfg);
        write_file(
            &dir.join(format!("validate_{label}.csv")),
            &validation_csv(&rows)?,
        )?;
        write_file(
            &dir.join(format!("validate_{label}_timing.csv")),
            &timing_csv(&rows)?,
        )?;
    }
    Ok(())
}

pub fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let kind = SuiteKind::parse(&a.suite)?;
    let mut suite = SuiteConfig::new(kind);
    let cfg = RunConfig::from_common(&a.common, "standard", "u", suite.n_max)?;
    suite.problem = cfg.problem.clone();
    suite.case = a.case;
    crate::calibration::magnitude_grid(a.case)?;
    suite.coefficients = a.coefs.as_deref().map(config::parse_reals).transpose()?;
    suite.scheme = cfg.scheme.flatten();
    suite.flavors = cfg.flavors.clone();
    suite.degrees = cfg.degrees.clone();
    suite.vars = cfg.vars.clone();
    suite.tol_prms = cfg.tol_prms.clone();
    suite.n_max = cfg.n_max;
    suite.rise_streak = a.rise_streak;
    let start = Instant::now();
    let report = sensitivity_suite(&suite)?;
    let dir = out_dir(&cfg);
    let files = report.write_csvs(&dir)?;
    let name = kind.name();
    write_file(
        &dir.join(format!("{name}_fits.csv")),
        &report.summary_csv()?,
    )?;
    let table = format_fits(&report);
    let text = format!(
        "suite {name}\ncpu {}\nelapsed {:.2} s\n\n{table}",
        cpu_identification(),
        start.elapsed().as_secs_f64()
    );
    write_file(&dir.join(format!("{name}_report.txt")), text.as_bytes())?;
    print!("{table}");
    for f in &files {
        println!("wrote {}", display(f));
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn list_catalog() -> Result<()> {
    for name in CATALOG {
        println!("{:<22} {}", name, describe(name).unwrap_or(""));
    }
    Ok(())
}
