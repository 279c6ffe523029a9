//! Error model, closed-form optimum, the normalization and prediction
//! algorithms, and brute-force refinement for comparison.

mod algorithm;
mod model;
mod sweep;
mod validation;

pub use algorithm::{
    brute_force_for, mesh_for, normalization, normalize, predict_all, prediction_discretization,
    prediction_loop, reachability_verdicts, time_optimal_solve, AlgorithmDefaults, MeshChoice,
    Normalization, PredictionResult, PredictionStatus,
};
pub use model::{alpha_r, beta_r, beta_t, fit_alpha_t, is_available, predict_opt, ErrorModel};
pub use sweep::{brute_force_sweep, Discretization, Solved, StopRule, SweepResult};
pub use validation::{validate, ValidationRow};
