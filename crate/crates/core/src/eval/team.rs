use std::io::Read;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::data::{player_overlap, Lineup};

/// Lineups must have played strictly more than one game's worth of minutes to
/// count towards a team rating.
pub const MIN_RATED_MINUTES: f64 = 48.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRating {
    pub team: String,
    pub rating: f64,
    /// Lineups that passed the minutes filter.
    pub lineups: usize,
}

/// Minutes-weighted mean of per-lineup strengths over lineups with more than
/// [`MIN_RATED_MINUTES`] on court. Entries are `(strength, minutes)`.
pub fn team_rating(entries: &[(f64, f64)]) -> Result<f64, EvalError> {
    let (num, den) = entries
        .iter()
        .filter(|(_, minutes)| *minutes > MIN_RATED_MINUTES)
        .fold((0.0, 0.0), |(n, d), (p, m)| (n + p * m, d + m));
    if den == 0.0 {
        return Err(EvalError::NoQualifyingLineups);
    }
    Ok(num / den)
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation between shared-player count and Euclidean embedding distance
/// over all unordered pairs of one team's lineups. `None` with fewer than
/// three pairs or when either quantity is constant.
pub fn similarity_distance_diag(lineups: &[(&Lineup, &[f64])]) -> Option<f64> {
    let mut overlap = Vec::new();
    let mut dist = Vec::new();
    for (i, (li, xi)) in lineups.iter().enumerate() {
        for (lj, xj) in &lineups[i + 1..] {
            overlap.push(player_overlap(li, lj) as f64);
            dist.push(
                xi.iter()
                    .zip(xj.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
            );
        }
    }
    if overlap.len() < 3 {
        return None;
    }
    pearson(&overlap, &dist)
}

/// A team's season record, read from a `team,wins,losses` CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRecord {
    pub team: String,
    pub wins: u32,
    pub losses: u32,
}

impl TeamRecord {
    pub fn win_fraction(&self) -> f64 {
        let games = self.wins + self.losses;
        if games == 0 {
            0.0
        } else {
            f64::from(self.wins) / f64::from(games)
        }
    }
}

pub fn read_team_records<R: Read>(r: R) -> Result<Vec<TeamRecord>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    rdr.deserialize().collect::<Result<_, _>>().map_err(EvalError::from)
}

/// Correlation between team ratings and win fractions over teams present in both.
pub fn rating_record_correlation(ratings: &[TeamRating], records: &[TeamRecord]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = ratings
        .iter()
        .filter_map(|r| {
            records
                .iter()
                .find(|rec| rec.team == r.team)
                .map(|rec| (r.rating, rec.win_fraction()))
        })
        .unzip();
    pearson(&xs, &ys)
}
