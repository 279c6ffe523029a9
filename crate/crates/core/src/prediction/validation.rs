use std::time::Instant;

use super::algorithm::{
    brute_force_for, normalize, prediction_loop, time_optimal_solve, AlgorithmDefaults,
    PredictionResult,
};
use super::model::is_available;
use super::sweep::StopRule;
use crate::assembly::Flavor;
use crate::error::Result;
use crate::error_analysis::{ErrorCurve, ErrorRecord};
use crate::problem::{ProblemSpec, Variable};

/// Prediction next to brute force for one (flavor, p, var).
#[derive(Debug, Clone)]
pub struct ValidationRow {
    pub prediction: PredictionResult,
    pub bf_curve: ErrorCurve,
    /// Normalization plus prediction.
    pub t_pred: f64,
    /// `t_pred` plus one solve at the predicted mesh.
    pub t_pred_plus: f64,
    pub t_bf: f64,
    /// Level of the extra solve; clamped to `N_max`.
    pub plus_level: Option<u32>,
}

impl ValidationRow {
    pub fn bf_minimum(&self) -> Option<&ErrorRecord> {
        self.bf_curve.minimum()
    }

    /// `1 - t_PRED+ / t_BF`.
    pub fn saved(&self) -> f64 {
        1.0 - self.t_pred_plus / self.t_bf
    }
}

/// Runs both paths for every available tuple. Brute force refines from
/// level 1 with the prediction's scaling until three consecutive rises
/// past `REF_min`, or until `bf_n_max`.
pub fn validate(
    spec: &ProblemSpec,
    flavor: Flavor,
    degrees: &[usize],
    vars: &[Variable],
    tol_var: f64,
    defaults: &AlgorithmDefaults,
    bf_n_max: usize,
) -> Result<Vec<ValidationRow>> {
    let Some(&p_min) = degrees.iter().min() else {
        return Ok(Vec::new());
    };
    let start = Instant::now();
    let norms = normalize(spec, flavor, p_min, defaults)?;
    let t_norm = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    for &p in degrees {
        for &var in vars {
            if !is_available(flavor, p, var) {
                continue;
            }
            let prediction = prediction_loop(spec, flavor, p, var, tol_var, &norms, defaults)?;
            let t_pred = t_norm + prediction.elapsed_secs;
            let plus = time_optimal_solve(spec, &prediction, &norms, defaults)?;
            let t_pred_plus = t_pred + plus.map_or(0.0, |x| x.1.as_secs_f64());
            let stop = StopRule {
                min_level: defaults.ref_min_for(p),
                n_max: bf_n_max,
                ..StopRule::default()
            };
            let bf = brute_force_for(spec, flavor, p, var, &norms, defaults, &stop)?;
            let (_, bf_curve) = bf
                .curves
                .into_iter()
                .next()
                .expect("one variable requested");
            rows.push(ValidationRow {
                prediction,
                bf_curve,
                t_pred,
                t_pred_plus,
                t_bf: bf.elapsed.as_secs_f64(),
                plus_level: plus.map(|x| x.0),
            });
        }
    }
    Ok(rows)
}
