//! Bradley–Terry model over embedding differences, and vectors for lineups
//! the embedding has not seen.
//!
//! The probability that lineup `i` outperforms lineup `j` is
//! `logistic(β·(xᵢ - xⱼ))`. There is no intercept, so swapping the two
//! arguments always yields the complementary probability.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{player_overlap, Lineup};
use crate::logistic::{self, Problem};

/// Ridge weight used when the unpenalized likelihood has no finite maximizer.
pub const SEPARABLE_L2: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("no training pairs")]
    Empty,
    #[error("penalty must be non-negative and finite, got {0}")]
    Penalty(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWarning {
    /// Training labels are perfectly separable; a tiny ridge was applied.
    Separable,
    /// Iteration budget exhausted before the gradient tolerance was met.
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtModel {
    coefficients: Vec<f64>,
    l2: f64,
}

impl BtModel {
    pub fn new(coefficients: Vec<f64>, l2: f64) -> Self {
        Self { coefficients, l2 }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    fn check(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(ModelError::Dimension {
                expected: self.dim(),
                found: x.len(),
            })
        }
    }

    /// Latent ability difference `β·(xi - xj)`.
    pub fn score(&self, xi: &[f64], xj: &[f64]) -> Result<f64, ModelError> {
        self.check(xi)?;
        self.check(xj)?;
        Ok(self
            .coefficients
            .iter()
            .zip(xi.iter().zip(xj))
            .map(|(b, (a, c))| b * (a - c))
            .sum())
    }

    /// Probability that the lineup with vector `xi` outperforms the one with `xj`.
    pub fn predict(&self, xi: &[f64], xj: &[f64]) -> Result<f64, ModelError> {
        Ok(logistic::logistic(self.score(xi, xj)?))
    }

    /// Text dump: `d <dim>`, `l2 <penalty>`, then one coefficient per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "d {}", self.dim())?;
        writeln!(w, "l2 {}", self.l2)?;
        for c in &self.coefficients {
            writeln!(w, "{c}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self, ModelError> {
        let mut lines = r.lines().enumerate();
        let mut header = |key: &str| -> Result<String, ModelError> {
            let (n, line) = lines.next().ok_or(ModelError::Parse {
                line: 0,
                message: format!("missing `{key}` header"),
            })?;
            let line = line?;
            line.strip_prefix(key)
                .map(|v| v.trim().to_owned())
                .ok_or(ModelError::Parse {
                    line: n + 1,
                    message: format!("expected `{key}`"),
                })
        };
        let parse_err = |line, what: &str| ModelError::Parse {
            line,
            message: format!("bad {what}"),
        };
        let dim: usize = header("d")?.parse().map_err(|_| parse_err(1, "dimension"))?;
        let l2: f64 = header("l2")?.parse().map_err(|_| parse_err(2, "l2"))?;
        let mut coefficients = Vec::with_capacity(dim);
        for (n, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            coefficients.push(line.trim().parse().map_err(|_| parse_err(n + 1, "coefficient"))?);
        }
        if coefficients.len() != dim {
            return Err(ModelError::Dimension {
                expected: dim,
                found: coefficients.len(),
            });
        }
        Ok(Self { coefficients, l2 })
    }
}

/// One labelled comparison, stored as the feature difference `xi - xj`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub diff: Vec<f64>,
    /// True iff the `xi` side (the lower-id lineup) outperformed.
    pub label: bool,
}

impl TrainingPair {
    pub fn new(xi: &[f64], xj: &[f64], label: bool) -> Self {
        Self {
            diff: xi.iter().zip(xj).map(|(a, b)| a - b).collect(),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtFit {
    pub model: BtModel,
    pub iterations: usize,
    pub grad_max_norm: f64,
    pub warning: Option<FitWarning>,
}

fn flatten(pairs: &[TrainingPair]) -> Result<(usize, Vec<f64>, Vec<bool>), ModelError> {
    let dim = pairs.first().ok_or(ModelError::Empty)?.diff.len();
    let mut rows = Vec::with_capacity(dim * pairs.len());
    for p in pairs {
        if p.diff.len() != dim {
            return Err(ModelError::Dimension {
                expected: dim,
                found: p.diff.len(),
            });
        }
        rows.extend_from_slice(&p.diff);
    }
    Ok((dim, rows, pairs.iter().map(|p| p.label).collect()))
}

/// Penalized Bernoulli log-likelihood `Σ log p(label) - ½ l2 ‖β‖²`.
pub fn penalized_log_likelihood(coef: &[f64], pairs: &[TrainingPair], l2: f64) -> Result<f64, ModelError> {
    let (dim, rows, labels) = flatten(pairs)?;
    let penalty = vec![l2; dim];
    Ok(Problem {
        rows: &rows,
        dim,
        labels: &labels,
        penalty: &penalty,
    }
    .objective(coef))
}

/// Gradient of [`penalized_log_likelihood`] with respect to the coefficients.
pub fn penalized_gradient(coef: &[f64], pairs: &[TrainingPair], l2: f64) -> Result<Vec<f64>, ModelError> {
    let (dim, rows, labels) = flatten(pairs)?;
    let penalty = vec![l2; dim];
    Ok(Problem {
        rows: &rows,
        dim,
        labels: &labels,
        penalty: &penalty,
    }
    .gradient(coef))
}

/// Fits the coefficients by penalized maximum likelihood.
///
/// Newton iterations stop when the gradient max-norm is at most 1e-6 or after
/// 500 iterations. With `l2 == 0` and separable labels the maximizer does not
/// exist; the fit is then redone with [`SEPARABLE_L2`] and flagged.
pub fn fit(pairs: &[TrainingPair], l2: f64) -> Result<BtFit, ModelError> {
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(ModelError::Penalty(l2));
    }
    let (dim, rows, labels) = flatten(pairs)?;
    let solve = |l2: f64| {
        let penalty = vec![l2; dim];
        let problem = Problem {
            rows: &rows,
            dim,
            labels: &labels,
            penalty: &penalty,
        };
        let sol = logistic::fit(&problem);
        let separable = problem.strictly_separates(&sol.coef);
        (sol, separable)
    };
    let (mut sol, separable) = solve(l2);
    let mut used_l2 = l2;
    let mut warning = None;
    if l2 == 0.0 && (separable || !sol.converged) {
        log::warn!("training labels are separable; refitting with l2 = {SEPARABLE_L2}");
        used_l2 = SEPARABLE_L2;
        sol = solve(SEPARABLE_L2).0;
        warning = Some(FitWarning::Separable);
    }
    if !sol.converged && warning.is_none() {
        log::warn!(
            "Bradley-Terry fit stopped with gradient max-norm {:e}",
            sol.grad_max_norm
        );
        warning = Some(FitWarning::NotConverged);
    }
    Ok(BtFit {
        model: BtModel::new(sol.coef, used_l2),
        iterations: sol.iterations,
        grad_max_norm: sol.grad_max_norm,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeMethod {
    /// Overlap-weighted average of teammates' vectors.
    Weighted,
    /// No teammate shares a player; plain mean of their vectors.
    TeamMean,
    /// No embedded teammates; zero vector.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Imputed {
    pub vector: Vec<f64>,
    pub method: ImputeMethod,
}

/// Vector for a lineup the embedding has not seen: the average of its team's
/// embedded lineups weighted by the number of shared players.
pub fn impute_unseen(team_lineups: &[(&Lineup, &[f64])], fresh: &Lineup, dim: usize) -> Imputed {
    if team_lineups.is_empty() {
        log::warn!("no embedded teammates for lineup {}; using the zero vector", fresh.id());
        return Imputed {
            vector: vec![0.0; dim],
            method: ImputeMethod::Zero,
        };
    }
    let weights: Vec<f64> = team_lineups
        .iter()
        .map(|(l, _)| player_overlap(fresh, l) as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    let (weights, total, method) = if total > 0.0 {
        (weights, total, ImputeMethod::Weighted)
    } else {
        (
            vec![1.0; team_lineups.len()],
            team_lineups.len() as f64,
            ImputeMethod::TeamMean,
        )
    };
    let mut vector = vec![0.0; dim];
    for ((_, x), w) in team_lineups.iter().zip(&weights) {
        for (acc, v) in vector.iter_mut().zip(x.iter()) {
            *acc += w * v;
        }
    }
    for v in &mut vector {
        *v /= total;
    }
    Imputed { vector, method }
}
