//! Penalized logistic regression by damped Newton iterations.
//!
//! The objective maximized is
//! `Σᵢ [yᵢ log σ(β·xᵢ) + (1-yᵢ) log σ(-β·xᵢ)] - ½ Σₖ λₖ βₖ²`.

use nalgebra::{DMatrix, DVector};

/// Stop once the gradient max-norm drops to this value.
pub const GRAD_TOL: f64 = 1e-6;
pub const MAX_ITER: usize = 500;

/// Logistic function with `logistic(s) + logistic(-s) == 1` exactly.
///
/// The non-negative branch is evaluated directly and clamped to the largest
/// double below one; the negative branch is its exact complement, so the
/// result always lies in the open interval (0, 1).
pub fn logistic(s: f64) -> f64 {
    const UPPER: f64 = 1.0 - f64::EPSILON / 2.0;
    if s >= 0.0 {
        (1.0 / (1.0 + (-s).exp())).min(UPPER)
    } else {
        1.0 - logistic(-s)
    }
}

/// `log σ(s)` without overflow.
fn log_sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        -(-s).exp().ln_1p()
    } else {
        s - s.exp().ln_1p()
    }
}

/// Row-major design matrix with binary labels.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub rows: &'a [f64],
    pub dim: usize,
    pub labels: &'a [bool],
    /// Per-coefficient ridge weights.
    pub penalty: &'a [f64],
}

impl Problem<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    fn score(&self, coef: &[f64], i: usize) -> f64 {
        self.row(i).iter().zip(coef).map(|(x, b)| x * b).sum()
    }

    pub fn objective(&self, coef: &[f64]) -> f64 {
        let ll: f64 = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let s = self.score(coef, i);
                if y {
                    log_sigmoid(s)
                } else {
                    log_sigmoid(-s)
                }
            })
            .sum();
        let pen: f64 = coef.iter().zip(self.penalty).map(|(b, l)| l * b * b).sum();
        ll - 0.5 * pen
    }

    pub fn gradient(&self, coef: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = coef.iter().zip(self.penalty).map(|(b, l)| -l * b).collect();
        for (i, &y) in self.labels.iter().enumerate() {
            let r = f64::from(u8::from(y)) - logistic(self.score(coef, i));
            for (gk, x) in g.iter_mut().zip(self.row(i)) {
                *gk += r * x;
            }
        }
        g
    }

    fn neg_hessian(&self, coef: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let mut h = DMatrix::from_diagonal(&DVector::from_column_slice(self.penalty));
        for i in 0..self.labels.len() {
            let p = logistic(self.score(coef, i));
            let w = p * (1.0 - p);
            if w == 0.0 {
                continue;
            }
            let x = self.row(i);
            for a in 0..d {
                let wa = w * x[a];
                if wa == 0.0 {
                    continue;
                }
                for b in a..d {
                    h[(a, b)] += wa * x[b];
                }
            }
        }
        h.fill_lower_triangle_with_upper_triangle();
        h
    }

    /// True when every row's label is predicted with a strict margin.
    pub fn strictly_separates(&self, coef: &[f64]) -> bool {
        self.labels.iter().enumerate().all(|(i, &y)| {
            let s = self.score(coef, i);
            if y {
                s > 0.0
            } else {
                s < 0.0
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub coef: Vec<f64>,
    pub iterations: usize,
    pub grad_max_norm: f64,
    pub converged: bool,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn solve_spd(h: DMatrix<f64>, g: &[f64]) -> DVector<f64> {
    let rhs = DVector::from_column_slice(g);
    let scale = h.diagonal().iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let mut jitter = 0.0;
    loop {
        let mut m = h.clone();
        for k in 0..m.nrows() {
            m[(k, k)] += jitter;
        }
        if let Some(chol) = m.cholesky() {
            return chol.solve(&rhs);
        }
        jitter = if jitter == 0.0 { 1e-12 * scale } else { jitter * 10.0 };
    }
}

/// Maximizes the penalized log-likelihood from a zero start.
pub fn fit(problem: &Problem<'_>) -> Solution {
    let d = problem.dim;
    let mut coef = vec![0.0; d];
    let mut obj = problem.objective(&coef);
    let mut grad = problem.gradient(&coef);
    let mut iterations = 0;
    while max_norm(&grad) > GRAD_TOL && iterations < MAX_ITER {
        iterations += 1;
        let step = solve_spd(problem.neg_hessian(&coef), &grad);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = coef.iter().zip(step.iter()).map(|(b, s)| b + t * s).collect();
            let trial_obj = problem.objective(&trial);
            if trial_obj >= obj {
                coef = trial;
                obj = trial_obj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        grad = problem.gradient(&coef);
        if !accepted {
            break;
        }
    }
    let grad_max_norm = max_norm(&grad);
    Solution {
        coef,
        iterations,
        grad_max_norm,
        converged: grad_max_norm <= GRAD_TOL,
    }
}
