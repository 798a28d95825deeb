//! End-to-end training and evaluation of the embedding model and both
//! baselines on a season.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    compute_apm, fit_scalar_model, pagerank_with, ApmRatings, PageRankOptions, PageRankScores, ScalarModel,
};
use crate::bt::{self, BtModel, FitWarning, ImputeMethod, TrainingPair};
use crate::data::{Lineup, LineupId, SeasonDataset};
use crate::embed::{generate_walks, train_embedding, EmbedConfig, Embedding, WalkConfig};
use crate::eval::{self, EvalReport, PairPrediction, SplitSpec, TeamRating};
use crate::network::build_network;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Ridge penalty of the Bradley–Terry fit.
    pub l2: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { l2: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApmConfig {
    pub ridge: f64,
}

impl Default for ApmConfig {
    fn default() -> Self {
        Self { ridge: 100.0 }
    }
}

/// Parameters of every stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub walk: WalkConfig,
    pub embed: EmbedConfig,
    pub model: ModelConfig,
    pub pagerank: PageRankOptions,
    pub apm: ApmConfig,
}

/// Diagnostics of one embedding-model fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub nodes: usize,
    pub edges: usize,
    pub walks: usize,
    pub mean_walk_hops: f64,
    pub max_walk_hops: usize,
    pub embedding_updates: u64,
    pub first_decile_loss: Option<f64>,
    pub last_decile_loss: Option<f64>,
    pub training_pairs: usize,
    pub bt_iterations: usize,
    pub bt_grad_max_norm: f64,
    pub bt_warning: Option<FitWarning>,
}

/// Embedding plus Bradley–Terry model trained on one season.
#[derive(Debug, Clone)]
pub struct LineupModel {
    pub embedding: Embedding,
    /// Lineups with at least one edge in the training network.
    pub seen: BTreeSet<LineupId>,
    pub model: BtModel,
    pub summary: TrainingSummary,
}

/// A lineup's feature vector and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct LineupVector {
    pub vector: Vec<f64>,
    /// `None` when the lineup was embedded directly.
    pub imputed: Option<ImputeMethod>,
}

fn decile_mean(curve: &[f64], last: bool) -> Option<f64> {
    let k = curve.len() / 10;
    if k == 0 {
        return None;
    }
    let slice = if last { &curve[curve.len() - k..] } else { &curve[..k] };
    Some(slice.iter().sum::<f64>() / k as f64)
}

impl LineupModel {
    pub fn train(ds: &SeasonDataset, cfg: &PipelineConfig) -> Result<Self, Error> {
        let net = build_network(ds);
        let walks = generate_walks(&net, &cfg.walk)?;
        let trained = train_embedding(&walks, &cfg.embed)?;
        let embedding = trained.embedding;
        let seen: BTreeSet<LineupId> = net
            .connected()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| net.id_of(i))
            .collect();

        let pairs: Vec<TrainingPair> = ds
            .labeled()
            .map(|m| {
                let xa = embedding.get(m.lineup_a).expect("every lineup is embedded");
                let xb = embedding.get(m.lineup_b).expect("every lineup is embedded");
                TrainingPair::new(xa, xb, m.label() == Some(true))
            })
            .collect();
        let fit = bt::fit(&pairs, cfg.model.l2)?;
        let summary = TrainingSummary {
            nodes: net.node_count(),
            edges: net.edge_count(),
            walks: walks.len(),
            mean_walk_hops: walks.mean_hops(),
            max_walk_hops: walks.hop_counts().max().unwrap_or(0),
            embedding_updates: trained.updates,
            first_decile_loss: decile_mean(&trained.loss_curve, false),
            last_decile_loss: decile_mean(&trained.loss_curve, true),
            training_pairs: pairs.len(),
            bt_iterations: fit.iterations,
            bt_grad_max_norm: fit.grad_max_norm,
            bt_warning: fit.warning,
        };
        Ok(Self {
            embedding,
            seen,
            model: fit.model,
            summary,
        })
    }

    pub fn from_parts(embedding: Embedding, seen: BTreeSet<LineupId>, model: BtModel) -> Self {
        let summary = TrainingSummary {
            nodes: embedding.len(),
            edges: 0,
            walks: 0,
            mean_walk_hops: 0.0,
            max_walk_hops: 0,
            embedding_updates: 0,
            first_decile_loss: None,
            last_decile_loss: None,
            training_pairs: 0,
            bt_iterations: 0,
            bt_grad_max_norm: 0.0,
            bt_warning: None,
        };
        Self {
            embedding,
            seen,
            model,
            summary,
        }
    }

    pub fn is_seen(&self, id: LineupId) -> bool {
        self.seen.contains(&id)
    }

    /// Learned vectors of a team's seen lineups, excluding `skip`.
    fn teammates<'a>(&'a self, ds: &'a SeasonDataset, team: &'a str, skip: LineupId) -> Vec<(&'a Lineup, &'a [f64])> {
        ds.team_lineups(team)
            .filter(|l| l.id() != skip && self.is_seen(l.id()))
            .filter_map(|l| self.embedding.get(l.id()).map(|x| (l, x)))
            .collect()
    }

    /// Vector for any lineup, imputing from teammates when it was not seen.
    pub fn vector_for(&self, ds: &SeasonDataset, lineup: &Lineup) -> Result<LineupVector, Error> {
        let id = lineup.id();
        if self.is_seen(id) {
            if let Some(x) = self.embedding.get(id) {
                return Ok(LineupVector {
                    vector: x.to_vec(),
                    imputed: None,
                });
            }
        }
        let team = ds.team_of(id).ok_or(Error::MissingTeam(id))?;
        Ok(self.impute(ds, lineup, team))
    }

    /// Imputed vector for a lineup of `team`, which need not be part of `ds`.
    pub fn impute(&self, ds: &SeasonDataset, lineup: &Lineup, team: &str) -> LineupVector {
        let imputed = bt::impute_unseen(&self.teammates(ds, team, lineup.id()), lineup, self.embedding.dim());
        LineupVector {
            vector: imputed.vector,
            imputed: Some(imputed.method),
        }
    }

    /// Vector for a lineup id of `ds`.
    pub fn vector(&self, ds: &SeasonDataset, id: LineupId) -> Result<LineupVector, Error> {
        let lineup = ds.lineup(id).ok_or(Error::UnknownLineup(id))?;
        self.vector_for(ds, lineup)
    }

    pub fn predict(&self, ds: &SeasonDataset, a: LineupId, b: LineupId) -> Result<f64, Error> {
        let xa = self.vector(ds, a)?;
        let xb = self.vector(ds, b)?;
        Ok(self.model.predict(&xa.vector, &xb.vector)?)
    }

    /// Overlap/distance correlation for every team, over its seen lineups.
    pub fn similarity_diagnostics(&self, ds: &SeasonDataset) -> Vec<(String, Option<f64>)> {
        ds.teams()
            .into_iter()
            .map(|team| {
                let members = self.teammates(ds, team, LineupId(u64::MAX));
                (team.to_owned(), eval::similarity_distance_diag(&members))
            })
            .collect()
    }
}

/// PageRank scores and the logistic model on their differences.
#[derive(Debug, Clone)]
pub struct PageRankModel {
    pub scores: PageRankScores,
    pub model: ScalarModel,
}

impl PageRankModel {
    pub fn train(ds: &SeasonDataset, opts: &PageRankOptions) -> Result<Self, Error> {
        let scores = pagerank_with(&build_network(ds), opts)?;
        let score = |id| scores.get(id).expect("every lineup is a node");
        let features: Vec<(f64, bool)> = ds
            .labeled()
            .map(|m| (score(m.lineup_a) - score(m.lineup_b), m.label() == Some(true)))
            .collect();
        let model = fit_scalar_model(&features)?.model;
        Ok(Self { scores, model })
    }

    pub fn predict(&self, a: LineupId, b: LineupId) -> Result<f64, Error> {
        let ra = self.scores.get(a).ok_or(Error::UnknownLineup(a))?;
        let rb = self.scores.get(b).ok_or(Error::UnknownLineup(b))?;
        Ok(self.model.predict(ra - rb))
    }
}

/// Player APM ratings and the logistic model on lineup rating differences.
#[derive(Debug, Clone)]
pub struct ApmModel {
    pub ratings: ApmRatings,
    pub model: ScalarModel,
}

impl ApmModel {
    pub fn train(ds: &SeasonDataset, cfg: &ApmConfig) -> Result<Self, Error> {
        let ratings = compute_apm(ds, cfg.ridge)?;
        let features = ds
            .labeled()
            .map(|m| {
                let ra = ratings.lineup_apm(ds.lineup(m.lineup_a).expect("known lineup"))?;
                let rb = ratings.lineup_apm(ds.lineup(m.lineup_b).expect("known lineup"))?;
                Ok((ra - rb, m.label() == Some(true)))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let model = fit_scalar_model(&features)?.model;
        Ok(Self { ratings, model })
    }

    pub fn predict(&self, ds: &SeasonDataset, a: LineupId, b: LineupId) -> Result<f64, Error> {
        let la = ds.lineup(a).ok_or(Error::UnknownLineup(a))?;
        let lb = ds.lineup(b).ok_or(Error::UnknownLineup(b))?;
        Ok(self
            .model
            .predict(self.ratings.lineup_apm(la)? - self.ratings.lineup_apm(lb)?))
    }
}

/// Reports of the three methods on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub split: SplitSpec,
    pub n_train: usize,
    pub embedding: EvalReport,
    pub pagerank: EvalReport,
    pub apm: EvalReport,
    pub training: TrainingSummary,
}

impl Comparison {
    pub fn reports(&self) -> [&EvalReport; 3] {
        [&self.embedding, &self.pagerank, &self.apm]
    }
}

/// Splits the season, trains all three methods on the training side and
/// scores them on the held-out records.
pub fn evaluate(ds: &SeasonDataset, spec: &SplitSpec, cfg: &PipelineConfig) -> Result<Comparison, Error> {
    let (train, test) = eval::split(ds, spec)?;
    let lineup_model = LineupModel::train(&train, cfg)?;
    let pr = PageRankModel::train(&train, &cfg.pagerank)?;
    let apm = ApmModel::train(&train, &cfg.apm)?;

    let mut emb_preds = Vec::new();
    let mut pr_preds = Vec::new();
    let mut apm_preds = Vec::new();
    let mut unseen = 0;
    for m in test.matchups() {
        let label = m.label().expect("test records are labelled");
        let (a, b) = (m.lineup_a, m.lineup_b);
        if !lineup_model.is_seen(a) || !lineup_model.is_seen(b) {
            unseen += 1;
        }
        let pair = |probability| PairPrediction {
            lineup_a: a,
            lineup_b: b,
            probability,
            label,
        };
        emb_preds.push(pair(lineup_model.predict(&test, a, b)?));
        pr_preds.push(pair(pr.predict(a, b)?));
        apm_preds.push(pair(apm.predict(&test, a, b)?));
    }
    Ok(Comparison {
        split: *spec,
        n_train: train.labeled().count(),
        embedding: EvalReport::from_predictions("embedding", emb_preds, unseen)?,
        pagerank: EvalReport::from_predictions("pagerank", pr_preds, unseen)?,
        apm: EvalReport::from_predictions("apm", apm_preds, unseen)?,
        training: lineup_model.summary,
    })
}

/// Team ratings from the embedding model: each lineup's mean win probability
/// against every lineup of other teams, weighted by its minutes played.
/// Teams without a lineup over the minutes threshold are skipped.
pub fn rate_teams(ds: &SeasonDataset, model: &LineupModel) -> Result<Vec<TeamRating>, Error> {
    if !ds.has_teams() {
        return Err(Error::NoTeams);
    }
    let vectors = ds
        .lineups()
        .map(|l| Ok((l.id(), model.vector_for(ds, l)?.vector)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut ratings = Vec::new();
    for team in ds.teams() {
        let mut entries = Vec::new();
        for (id, x) in &vectors {
            if ds.team_of(*id) != Some(team) {
                continue;
            }
            let (mut sum, mut n) = (0.0, 0usize);
            for (other, y) in &vectors {
                if ds.team_of(*other) == Some(team) {
                    continue;
                }
                sum += model.model.predict(x, y)?;
                n += 1;
            }
            if n > 0 {
                entries.push((sum / n as f64, ds.minutes_played(*id)));
            }
        }
        match eval::team_rating(&entries) {
            Ok(rating) => ratings.push(TeamRating {
                team: team.to_owned(),
                rating,
                lineups: entries.iter().filter(|(_, m)| *m > eval::MIN_RATED_MINUTES).count(),
            }),
            Err(eval::EvalError::NoQualifyingLineups) => {
                log::warn!("team {team} has no lineup over {} minutes", eval::MIN_RATED_MINUTES)
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ratings)
}
