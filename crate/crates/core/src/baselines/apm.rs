use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::BaselineError;
use crate::data::{Lineup, PlayerId, SeasonDataset};

/// Minutes in a regulation game; responses are expressed per this many minutes.
pub const GAME_MINUTES: f64 = 48.0;

/// Adjusted plus/minus rating per player.
#[derive(Debug, Clone, PartialEq)]
pub struct ApmRatings {
    players: BTreeMap<PlayerId, f64>,
    pub ridge: f64,
}

impl ApmRatings {
    pub fn get(&self, player: &PlayerId) -> Option<f64> {
        self.players.get(player).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlayerId, f64)> {
        self.players.iter().map(|(p, a)| (p, *a))
    }

    pub fn norm(&self) -> f64 {
        self.players.values().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Lineup rating: mean of its five players' ratings.
    pub fn lineup_apm(&self, lineup: &Lineup) -> Result<f64, BaselineError> {
        let mut sum = 0.0;
        for p in lineup.players() {
            sum += self.get(p).ok_or_else(|| BaselineError::UnknownPlayer {
                lineup: lineup.id(),
                player: p.to_string(),
            })?;
        }
        Ok(sum / lineup.players().len() as f64)
    }

    /// CSV dump `player_id,apm`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["player_id", "apm"])?;
        for (p, a) in &self.players {
            out.write_record([p.as_str(), &a.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Ridge regression of per-48-minute point margins on signed player
/// indicators: +1 for players of the lower-id lineup, -1 for the other side.
/// Rows are weighted by minutes. `ridge == 0` returns the minimum-norm
/// least-squares solution.
pub fn compute_apm(ds: &SeasonDataset, ridge: f64) -> Result<ApmRatings, BaselineError> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(BaselineError::Ridge(ridge));
    }
    if ds.matchups().is_empty() {
        return Err(BaselineError::NoMatchups);
    }
    let players: Vec<&PlayerId> = {
        let mut all: Vec<&PlayerId> = ds.lineups().flat_map(|l| l.players()).collect();
        all.sort();
        all.dedup();
        all
    };
    let col = |p: &PlayerId| players.binary_search(&p).expect("player is in the lineup table");
    let n = players.len();
    let mut normal = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);

    for m in ds.matchups() {
        let y = m.point_diff / m.minutes * GAME_MINUTES;
        let w = m.minutes;
        let entries: Vec<(usize, f64)> = ds
            .lineup(m.lineup_a)
            .expect("known lineup")
            .players()
            .iter()
            .map(|p| (col(p), 1.0))
            .chain(
                ds.lineup(m.lineup_b)
                    .expect("known lineup")
                    .players()
                    .iter()
                    .map(|p| (col(p), -1.0)),
            )
            .collect();
        for &(a, sa) in &entries {
            rhs[a] += w * sa * y;
            for &(b, sb) in &entries {
                normal[(a, b)] += w * sa * sb;
            }
        }
    }

    let coef = if ridge > 0.0 {
        for k in 0..n {
            normal[(k, k)] += ridge;
        }
        normal.cholesky().ok_or(BaselineError::Singular)?.solve(&rhs)
    } else {
        let svd = normal.svd(true, true);
        let eps = svd.singular_values.max() * 1e-10;
        svd.solve(&rhs, eps).map_err(|_| BaselineError::Singular)?
    };
    Ok(ApmRatings {
        players: players.into_iter().cloned().zip(coef.iter().copied()).collect(),
        ridge,
    })
}
