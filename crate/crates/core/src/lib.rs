//! Lineup matchup networks, node embeddings and Bradley–Terry prediction of
//! lineup-versus-lineup outcomes, with PageRank and adjusted plus-minus
//! baselines.

pub mod baselines;
pub mod bt;
pub mod data;
pub mod embed;
pub mod eval;
pub mod logistic;
pub mod network;
pub mod pipeline;
pub mod synth;

use thiserror::Error;

pub use baselines::BaselineError;
pub use bt::{BtModel, ModelError};
pub use data::{
    ingest, ingest_with, DataError, IngestOptions, Lineup, LineupId, MatchupRecord, PlayerId, SeasonDataset,
};
pub use embed::{EmbedConfig, EmbedError, Embedding, WalkConfig};
pub use eval::{EvalError, EvalReport, SplitSpec};
pub use network::{build_network, MatchupNetwork, NetworkError};
pub use pipeline::{evaluate, rate_teams, Comparison, LineupModel, PipelineConfig};
pub use synth::{SynthConfig, SynthError};

/// Any failure of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("lineup {0} is unseen and has no team to impute from")]
    MissingTeam(LineupId),
    #[error("unknown lineup {0}")]
    UnknownLineup(LineupId),
    #[error("the season has no team assignments")]
    NoTeams,
}
