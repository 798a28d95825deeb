use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::bt::{FitWarning, SEPARABLE_L2};
use crate::logistic::{self, Problem};

/// One-feature logistic model `P = logistic(slope·Δ + intercept)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarModel {
    pub slope: f64,
    pub intercept: f64,
}

impl ScalarModel {
    pub fn predict(&self, delta: f64) -> f64 {
        logistic::logistic(self.slope * delta + self.intercept)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFit {
    pub model: ScalarModel,
    pub iterations: usize,
    pub grad_max_norm: f64,
    pub warning: Option<FitWarning>,
}

/// Maximum-likelihood fit of slope and intercept; separable data are refit
/// with a ridge of [`SEPARABLE_L2`] on both parameters.
pub fn fit_scalar_model(features: &[(f64, bool)]) -> Result<ScalarFit, BaselineError> {
    if features.is_empty() {
        return Err(BaselineError::Empty);
    }
    let rows: Vec<f64> = features.iter().flat_map(|&(d, _)| [d, 1.0]).collect();
    let labels: Vec<bool> = features.iter().map(|&(_, y)| y).collect();
    let solve = |l2: f64| {
        let penalty = [l2, l2];
        let problem = Problem {
            rows: &rows,
            dim: 2,
            labels: &labels,
            penalty: &penalty,
        };
        let sol = logistic::fit(&problem);
        let separable = problem.strictly_separates(&sol.coef);
        (sol, separable)
    };
    let (mut sol, separable) = solve(0.0);
    let mut warning = None;
    if separable || !sol.converged {
        log::warn!("scalar feature separates the labels; refitting with l2 = {SEPARABLE_L2}");
        sol = solve(SEPARABLE_L2).0;
        warning = Some(FitWarning::Separable);
    }
    if !sol.converged && warning.is_none() {
        warning = Some(FitWarning::NotConverged);
    }
    Ok(ScalarFit {
        model: ScalarModel {
            slope: sol.coef[0],
            intercept: sol.coef[1],
        },
        iterations: sol.iterations,
        grad_max_norm: sol.grad_max_norm,
        warning,
    })
}
