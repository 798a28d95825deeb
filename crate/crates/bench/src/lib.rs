//! Fixtures shared by the benchmarks.

use matchnet::synth::{generate, GroundTruth};
use matchnet::{SeasonDataset, SynthConfig};

/// A synthetic season of `n_teams` teams with `lineups_per_team` lineups each.
pub fn season(n_teams: usize, lineups_per_team: usize) -> (SeasonDataset, GroundTruth) {
    let cfg = SynthConfig {
        n_teams,
        lineups_per_team,
        ..SynthConfig::default()
    };
    generate(&cfg).expect("valid synthetic config")
}
