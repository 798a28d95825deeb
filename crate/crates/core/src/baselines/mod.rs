//! Comparison ratings: PageRank on the matchup network and adjusted
//! plus/minus of the players, each turned into a probability by a
//! one-feature logistic model on the rating difference.

mod apm;
mod pagerank;
mod scalar;

use std::io::Write;

use thiserror::Error;

use crate::data::LineupId;

pub use apm::{compute_apm, ApmRatings, GAME_MINUTES};
pub use pagerank::{pagerank, pagerank_with, PageRankOptions, PageRankScores, PageRankSolver, RESIDUAL_TOL};
pub use scalar::{fit_scalar_model, ScalarFit, ScalarModel};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("damping parameter must lie in [0, 1), got {0}")]
    Alpha(f64),
    #[error("ridge must be non-negative and finite, got {0}")]
    Ridge(f64),
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("dataset has no matchups")]
    NoMatchups,
    #[error("no training pairs")]
    Empty,
    #[error("linear system is singular")]
    Singular,
    #[error("iteration stopped with residual {0:e}")]
    NotConverged(f64),
    #[error("lineup {lineup}: player {player} has no rating")]
    UnknownPlayer { lineup: LineupId, player: String },
}

/// CSV dump `lineup_id,pagerank`.
pub fn write_pagerank_csv<W: Write>(scores: &PageRankScores, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lineup_id", "pagerank"])?;
    for (id, s) in scores.iter() {
        out.write_record([id.to_string(), s.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
