//! `fem-errbal {sweep|predict|validate|calibrate|catalog}`.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::assembly::{DirichletMode, Flavor, DEFAULT_PENALTY};
use crate::error::{FemError, Result};
use crate::error_analysis::ScalingScheme;
use crate::prediction::AlgorithmDefaults;
use crate::problem::{catalog, Variable, CATALOG};
use crate::solvers::{InnerSolver, SolverChoice};

pub use commands::{prediction_json, PredictionJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fem-errbal",
    version,
    about = "Predict the highest attainable FEM accuracy by balancing truncation and round-off error",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Brute-force h-refinement; writes one error-curve CSV per (fem, p, var).
    Sweep(SweepArgs),
    /// Normalization followed by prediction of N_opt and E_min.
    Predict(PredictArgs),
    /// Prediction and brute force side by side, with timings.
    Validate(ValidateArgs),
    /// Round-off calibration studies (solver, magnitude, boundary).
    Calibrate(CalibrateArgs),
    /// List the built-in problems.
    Catalog,
}

/// Settings shared by the solving subcommands. Every flag may also be given
/// as `key = value` in a file passed with `--config`.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Config file with `key = value` lines; explicit flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "bench-poisson")]
    pub problem: String,
    /// Coefficient c_i of case1..case5.
    #[arg(long)]
    pub coef: Option<f64>,
    /// standard, mixed or both.
    #[arg(long)]
    pub fem: Option<String>,
    /// Degree set such as 2, 1..5 or 1,3,5.
    #[arg(long)]
    pub p: Option<String>,
    /// Variables: comma list of u, ux, uxx, or all.
    #[arg(long)]
    pub var: Option<String>,
    /// lu, cg or schur.
    #[arg(long, default_value = "lu")]
    pub solver: String,
    /// Relative residual tolerance of the iterative solvers.
    #[arg(long = "tol-prm", default_value = "1e-10")]
    pub tol_prm: String,
    /// Inner solver of the Schur path: direct or cg.
    #[arg(long, default_value = "direct")]
    pub inner: String,
    /// none, S, M1, M2, or default (per flavor and variable).
    #[arg(long)]
    pub scheme: Option<String>,
    /// strong or weak Dirichlet imposition.
    #[arg(long, default_value = "strong")]
    pub dirichlet: String,
    /// Penalty of weak Dirichlet imposition.
    #[arg(long, default_value_t = DEFAULT_PENALTY)]
    pub penalty: f64,
    /// Largest DoF count any refinement may reach (default 1e8).
    #[arg(long = "n-max")]
    pub n_max: Option<String>,
    /// Output directory for CSV/JSON files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Consecutive error increases that end the sweep.
    #[arg(long = "rise-streak", default_value_t = 3)]
    pub rise_streak: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Target accuracy tol_var for the reachable verdict.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Overrides REF_min.
    #[arg(long = "ref-min")]
    pub ref_min: Option<u32>,
    #[arg(long = "c-s", default_value_t = 0.001)]
    pub c_s: f64,
    /// Overrides the degree-dependent c_r.
    #[arg(long = "c-r")]
    pub c_r: Option<f64>,
    /// table or json.
    #[arg(long, default_value = "table")]
    pub format: String,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub predict: PredictArgs,
    /// DoF cap of the brute-force sweeps; defaults to --n-max.
    #[arg(long = "bf-n-max")]
    pub bf_n_max: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// solver, magnitude or boundary.
    #[arg(long)]
    pub suite: String,
    /// Case number of the magnitude suite.
    #[arg(long, default_value_t = 1)]
    pub case: usize,
    /// Coefficient grid of the magnitude suite, overriding the default.
    #[arg(long)]
    pub coefs: Option<String>,
    #[arg(long = "rise-streak", default_value_t = 5)]
    pub rise_streak: usize,
}

/// Validated settings of the solving subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub coef: Option<f64>,
    pub flavors: Vec<Flavor>,
    pub degrees: Option<Vec<usize>>,
    pub vars: Vec<Variable>,
    pub solver: SolverChoice,
    pub tol_prms: Vec<f64>,
    /// `None` = no override given; `Some(None)` = per-variable default.
    pub scheme: Option<Option<ScalingScheme>>,
    pub dirichlet: DirichletMode,
    pub n_max: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_common(
        a: &CommonArgs,
        default_fem: &str,
        default_var: &str,
        default_n_max: usize,
    ) -> Result<Self> {
        if !CATALOG.contains(&a.problem.as_str()) {
            return Err(FemError::UnknownProblem {
                name: a.problem.clone(),
                available: CATALOG.join(", "),
            });
        }
        catalog(&a.problem, a.coef)?;
        let tol_prms = config::parse_reals(&a.tol_prm)?;
        for &t in &tol_prms {
            if !(t > 0.0 && t < 1.0) {
                return Err(FemError::arg(format!(
                    "tol-prm must lie in (0, 1), got {t}"
                )));
            }
        }
        let inner = match a.inner.as_str() {
            "direct" | "lu" => InnerSolver::Direct,
            "cg" => InnerSolver::Cg(tol_prms[0]),
            other => return Err(FemError::arg(format!("unknown inner solver '{other}'"))),
        };
        let solver = match a.solver.as_str() {
            "lu" | "direct" => SolverChoice::Direct,
            "cg" => SolverChoice::Cg { tol: tol_prms[0] },
            "schur" => SolverChoice::Schur {
                tol: tol_prms[0],
                inner,
            },
            other => {
                return Err(FemError::arg(format!(
                    "unknown solver '{other}' (expected lu, cg or schur)"
                )))
            }
        };
        let scheme = match a.scheme.as_deref() {
            None => None,
            Some("default") => Some(None),
            Some(s) => Some(Some(ScalingScheme::parse(s)?)),
        };
        let dirichlet = match a.dirichlet.as_str() {
            "strong" => DirichletMode::Strong,
            "weak" => {
                if !(a.penalty.is_finite() && a.penalty > 0.0) {
                    return Err(FemError::arg("penalty must be positive"));
                }
                DirichletMode::Weak(a.penalty)
            }
            other => return Err(FemError::arg(format!("unknown dirichlet mode '{other}'"))),
        };
        Ok(RunConfig {
            problem: a.problem.clone(),
            coef: a.coef,
            flavors: config::parse_flavors(a.fem.as_deref().unwrap_or(default_fem))?,
            degrees: a.p.as_deref().map(config::parse_degrees).transpose()?,
            vars: config::parse_vars(a.var.as_deref().unwrap_or(default_var))?,
            solver,
            tol_prms,
            scheme,
            dirichlet,
            n_max: a
                .n_max
                .as_deref()
                .map(config::parse_count)
                .transpose()?
                .unwrap_or(default_n_max),
            out: a.out.clone(),
        })
    }

    pub fn degrees_or(&self, default: &str) -> Result<Vec<usize>> {
        match &self.degrees {
            Some(d) => Ok(d.clone()),
            None => config::parse_degrees(default),
        }
    }

    pub fn defaults(&self, p: &PredictArgs) -> Result<AlgorithmDefaults> {
        if !(p.c_s > 0.0 && p.c_s < 1.0) {
            return Err(FemError::arg("c-s must lie in (0, 1)"));
        }
        if let Some(c) = p.c_r {
            if !(c > 0.0 && c <= 1.0) {
                return Err(FemError::arg("c-r must lie in (0, 1]"));
            }
        }
        if !(p.tol > 0.0) {
            return Err(FemError::arg("tol must be positive"));
        }
        Ok(AlgorithmDefaults {
            ref_min: p.ref_min,
            c_s: p.c_s,
            c_r: p.c_r,
            n_max: self.n_max,
            solver: self.solver,
            dirichlet: self.dirichlet,
            scheme: self.scheme.flatten(),
            ..AlgorithmDefaults::default()
        })
    }
}

fn exit_code(e: &FemError) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Sweep(a) => commands::sweep(a),
        Command::Predict(a) => commands::predict(a),
        Command::Validate(a) => commands::validate(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Catalog => commands::list_catalog(),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
