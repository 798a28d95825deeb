use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::data::LineupId;
use crate::network::MatchupNetwork;

/// Stopping threshold on the max-norm residual of the fixed-point equation.
pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageRankSolver {
    /// Fixed-point iteration over the sparse edge lists.
    #[default]
    Iterative,
    /// Dense LU factorization.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankOptions {
    pub alpha: f64,
    /// Use edge weights; otherwise every edge counts as 1.
    pub weighted: bool,
    pub solver: PageRankSolver,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            weighted: true,
            solver: PageRankSolver::Iterative,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankScores {
    ids: Vec<LineupId>,
    scores: Vec<f64>,
    pub alpha: f64,
}

impl PageRankScores {
    /// Scores in node order (ascending lineup id).
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn get(&self, id: LineupId) -> Option<f64> {
        self.ids.binary_search(&id).ok().map(|k| self.scores[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (LineupId, f64)> + '_ {
        self.ids.iter().copied().zip(self.scores.iter().copied())
    }
}

/// Weighted PageRank with the default options.
pub fn pagerank(net: &MatchupNetwork, alpha: f64) -> Result<PageRankScores, BaselineError> {
    pagerank_with(
        net,
        &PageRankOptions {
            alpha,
            ..Default::default()
        },
    )
}

/// Solves `r = D (D - αA)⁻¹ 1`, where `A[i][j]` is the weight of the edge
/// `j -> i` and `D[i][i] = max(1, out-weight of i)`.
///
/// Equivalently `r` is the fixed point of `rᵢ = 1 + α Σ_{j->i} w(j,i) rⱼ / D[j][j]`,
/// so credit flows from the outperformed lineup to the one that beat it.
pub fn pagerank_with(net: &MatchupNetwork, opts: &PageRankOptions) -> Result<PageRankScores, BaselineError> {
    let alpha = opts.alpha;
    if !(0.0..1.0).contains(&alpha) {
        return Err(BaselineError::Alpha(alpha));
    }
    if net.is_empty() {
        return Err(BaselineError::EmptyNetwork);
    }
    let weight = |w: f64| if opts.weighted { w } else { 1.0 };
    let n = net.node_count();
    let diag: Vec<f64> = (0..n)
        .map(|i| net.out_edges(i).iter().map(|&(_, w)| weight(w)).sum::<f64>().max(1.0))
        .collect();

    let scores = match opts.solver {
        PageRankSolver::Iterative => {
            let mut r = vec![1.0; n];
            let mut next = vec![0.0; n];
            let mut sweeps = 0;
            loop {
                next.iter_mut().for_each(|x| *x = 1.0);
                for j in 0..n {
                    let share = alpha * r[j] / diag[j];
                    for &(i, w) in net.out_edges(j) {
                        next[i] += share * weight(w);
                    }
                }
                let residual = next.iter().zip(&r).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                std::mem::swap(&mut r, &mut next);
                sweeps += 1;
                if residual <= RESIDUAL_TOL {
                    break;
                }
                if sweeps >= MAX_SWEEPS {
                    return Err(BaselineError::NotConverged(residual));
                }
            }
            r
        }
        PageRankSolver::Direct => {
            // (I - α A D⁻¹) r = 1, the same system with r as the unknown
            let mut m = DMatrix::<f64>::identity(n, n);
            for (j, i, w) in net.edges() {
                m[(i, j)] -= alpha * weight(w) / diag[j];
            }
            let r = m
                .lu()
                .solve(&DVector::from_element(n, 1.0))
                .ok_or(BaselineError::Singular)?;
            r.iter().copied().collect()
        }
    };
    Ok(PageRankScores {
        ids: net.ids().to_vec(),
        scores,
        alpha,
    })
}
