use serde::{Deserialize, Serialize};

use crate::assembly::Flavor;
use crate::error::{FemError, Result};
use crate::problem::Variable;

/// Theoretical truncation rate in terms of DoFs; `None` where the variable
/// is not available (standard `u_xx` with `p = 1`).
pub fn beta_t(flavor: Flavor, p: usize, var: Variable) -> Option<f64> {
    let p = p as f64;
    let rate = match (flavor, var) {
        (Flavor::Standard, Variable::U) => p + 1.0,
        (Flavor::Standard, Variable::Ux) => p,
        (Flavor::Standard, Variable::Uxx) => p - 1.0,
        (Flavor::Mixed, Variable::U) => p,
        (Flavor::Mixed, Variable::Ux) => p + 1.0,
        (Flavor::Mixed, Variable::Uxx) => p,
    };
    (rate > 0.0).then_some(rate)
}

pub fn is_available(flavor: Flavor, p: usize, var: Variable) -> bool {
    p >= 1 && beta_t(flavor, p, var).is_some()
}

pub fn beta_r(flavor: Flavor) -> f64 {
    match flavor {
        Flavor::Standard => 2.0,
        Flavor::Mixed => 1.0,
    }
}

pub fn alpha_r(var: Variable) -> f64 {
    match var {
        Variable::U => 2e-17,
        Variable::Ux => 5e-17,
        Variable::Uxx => 1e-15,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub alpha_t: f64,
    pub beta_t: f64,
    pub alpha_r: f64,
    pub beta_r: f64,
}

impl ErrorModel {
    pub fn new(alpha_t: f64, beta_t: f64, alpha_r: f64, beta_r: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha_T", alpha_t),
            ("beta_T", beta_t),
            ("alpha_R", alpha_r),
            ("beta_R", beta_r),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(FemError::arg(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(ErrorModel {
            alpha_t,
            beta_t,
            alpha_r,
            beta_r,
        })
    }

    pub fn truncation(&self, n: f64) -> f64 {
        self.alpha_t * n.powf(-self.beta_t)
    }

    pub fn round_off(&self, n: f64) -> f64 {
        self.alpha_r * n.powf(self.beta_r)
    }

    pub fn total(&self, n: f64) -> f64 {
        self.truncation(n) + self.round_off(n)
    }
}

/// `alpha_T = E_c N_c^beta_T`.
pub fn fit_alpha_t(e_c: f64, n_c: f64, beta_t: f64) -> Result<f64> {
    if !(e_c > 0.0 && n_c > 0.0 && beta_t > 0.0) || !(e_c.is_finite() && n_c.is_finite()) {
        return Err(FemError::arg(format!(
            "fit_alpha_T needs positive inputs, got E_c = {e_c}, N_c = {n_c}, beta_T = {beta_t}"
        )));
    }
    Ok(e_c * n_c.powf(beta_t))
}

/// Stationary point of `alpha_T N^-beta_T + alpha_R N^beta_R`: `(N_opt, E_min)`.
pub fn predict_opt(model: &ErrorModel) -> (f64, f64) {
    let ErrorModel {
        alpha_t,
        beta_t,
        alpha_r,
        beta_r,
    } = *model;
    // log form keeps extreme offsets from overflowing
    let log_n = ((alpha_t * beta_t).ln() - (alpha_r * beta_r).ln()) / (beta_t + beta_r);
    let n_opt = log_n.exp();
    (n_opt, model.total(n_opt))
}
