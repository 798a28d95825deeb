//! Synthetic seasons with planted lineup abilities.
//!
//! Each team owns a pool of `lineups_per_team + 4` players and lineup `k` of a
//! team fields pool players `k..k+5`, so neighbouring lineups share four
//! players. Every player has a skill drawn from a standard normal; a lineup's
//! ability mixes the scaled sum of its players' skills with lineup-specific
//! noise so that it is marginally `Normal(0, ability_sd²)`, with
//! `player_share` of the variance carried by the players.
//!
//! Only lineups of different teams meet. Each such pair is played with
//! probability `matchup_density`, for a uniform number of minutes, with a
//! per-minute margin of `Normal(πᵢ - πⱼ, noise_sd²)`.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Lineup, LineupId, MatchupRecord, PlayerId, SeasonDataset, LINEUP_SIZE};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_teams: usize,
    pub lineups_per_team: usize,
    pub ability_sd: f64,
    pub noise_sd: f64,
    pub matchup_density: f64,
    pub minutes_range: (f64, f64),
    /// Fraction of ability variance explained by the players' skills.
    pub player_share: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_teams: 8,
            lineups_per_team: 6,
            ability_sd: 1.0,
            noise_sd: 0.5,
            matchup_density: 0.5,
            minutes_range: (2.0, 30.0),
            player_share: 0.75,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_owned()));
        if self.n_teams < 2 {
            return bad("n_teams must be at least 2");
        }
        if self.lineups_per_team < 2 {
            return bad("lineups_per_team must be at least 2");
        }
        if !(self.ability_sd > 0.0 && self.ability_sd.is_finite()) {
            return bad("ability_sd must be positive");
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad("noise_sd must be non-negative");
        }
        if !(self.matchup_density > 0.0 && self.matchup_density <= 1.0) {
            return bad("matchup_density must lie in (0, 1]");
        }
        let (lo, hi) = self.minutes_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("minutes_range must satisfy 0 < lo <= hi");
        }
        if !(0.0..=1.0).contains(&self.player_share) {
            return bad("player_share must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Planted abilities of a generated season.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub abilities: BTreeMap<LineupId, f64>,
}

impl GroundTruth {
    pub fn ability(&self, id: LineupId) -> f64 {
        self.abilities[&id]
    }

    /// CSV `lineup_id,ability`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["lineup_id", "ability"])?;
        for (id, a) in &self.abilities {
            out.write_record([id.to_string(), a.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Accuracy of calling the higher-ability lineup the winner, over the
    /// labelled records of `ds`.
    pub fn oracle_accuracy<'a>(&self, records: impl IntoIterator<Item = &'a MatchupRecord>) -> f64 {
        let (mut correct, mut total) = (0usize, 0usize);
        for m in records {
            let Some(label) = m.label() else { continue };
            let gap = self.ability(m.lineup_a) - self.ability(m.lineup_b);
            total += 1;
            if (gap > 0.0 && label) || (gap < 0.0 && !label) {
                correct += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }
}

pub fn team_name(t: usize) -> String {
    format!("T{:02}", t + 1)
}

/// Generates a season and its planted abilities. Deterministic per `cfg.seed`.
pub fn generate(cfg: &SynthConfig) -> Result<(SeasonDataset, GroundTruth), SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pool = cfg.lineups_per_team + LINEUP_SIZE - 1;

    let mut lineups = Vec::new();
    let mut teams = Vec::new();
    let mut abilities = BTreeMap::new();
    let mut team_idx = Vec::new();
    let player_weight = cfg.player_share.sqrt() / (LINEUP_SIZE as f64).sqrt();
    let own_weight = (1.0 - cfg.player_share).sqrt();
    for t in 0..cfg.n_teams {
        let skills: Vec<f64> = (0..pool).map(|_| rng.sample(StandardNormal)).collect();
        for k in 0..cfg.lineups_per_team {
            let id = LineupId((t * cfg.lineups_per_team + k + 1) as u64);
            let players = (k..k + LINEUP_SIZE)
                .map(|p| PlayerId::new(format!("{}P{:02}", team_name(t), p + 1)).expect("non-empty"))
                .collect();
            let own: f64 = rng.sample(StandardNormal);
            let skill_sum: f64 = skills[k..k + LINEUP_SIZE].iter().sum();
            let ability = cfg.ability_sd * (player_weight * skill_sum + own_weight * own);
            lineups.push(Lineup::new(id, players).expect("pool windows hold distinct players"));
            teams.push((id, team_name(t)));
            abilities.insert(id, ability);
            team_idx.push(t);
        }
    }

    let (lo, hi) = cfg.minutes_range;
    let mut records = Vec::new();
    for i in 0..lineups.len() {
        for j in i + 1..lineups.len() {
            if team_idx[i] == team_idx[j] {
                continue;
            }
            if rng.random::<f64>() >= cfg.matchup_density {
                continue;
            }
            let minutes = if hi > lo { rng.random_range(lo..hi) } else { lo };
            let (a, b) = (lineups[i].id(), lineups[j].id());
            let z: f64 = rng.sample(StandardNormal);
            let per_minute = abilities[&a] - abilities[&b] + cfg.noise_sd * z;
            records.push(MatchupRecord::oriented(a, b, minutes, per_minute * minutes));
        }
    }
    let ds = SeasonDataset::from_parts(lineups, records, teams).expect("generated season is valid");
    Ok((ds, GroundTruth { abilities }))
}
