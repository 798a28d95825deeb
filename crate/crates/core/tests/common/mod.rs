#![allow(dead_code)]

use matchnet::data::{LineupId, MatchupRecord};
use matchnet::network::MatchupNetwork;
use matchnet::synth::{generate, GroundTruth};
use matchnet::{SeasonDataset, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed graph on nodes `1..=n`; each ordered pair carries an edge
/// with probability `density`, never both directions.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, density: f64) -> MatchupNetwork {
    let mut edges = Vec::new();
    for i in 1..=n as u64 {
        for j in i + 1..=n as u64 {
            if rng.random::<f64>() < density {
                let w = rng.random_range(0.05..5.0);
                if rng.random::<bool>() {
                    edges.push((LineupId(i), LineupId(j), w));
                } else {
                    edges.push((LineupId(j), LineupId(i), w));
                }
            }
        }
    }
    MatchupNetwork::from_edges((1..=n as u64).map(LineupId), edges).unwrap()
}

/// Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            let (top, bottom) = a.split_at_mut(row);
            for (t, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *t -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Scores `D (D - alpha A)^-1 1`, with `A[i][j]` the weight of the edge
/// `j -> i` and `D[i][i] = max(1, weighted out-degree of i)`.
pub fn dense_pagerank(net: &MatchupNetwork, alpha: f64) -> Vec<f64> {
    let n = net.node_count();
    let d: Vec<f64> = (0..n).map(|i| net.out_weight(i).max(1.0)).collect();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = d[i];
    }
    for (src, dst, w) in net.edges() {
        m[dst][src] -= alpha * w;
    }
    let y = solve_dense(m, vec![1.0; n]);
    y.iter().zip(&d).map(|(y, d)| y * d).collect()
}

/// Configuration of the synthetic reference season.
pub fn reference_season() -> (SeasonDataset, GroundTruth) {
    let cfg = SynthConfig {
        n_teams: 8,
        lineups_per_team: 6,
        ability_sd: 1.0,
        noise_sd: 0.5,
        matchup_density: 0.5,
        seed: 7,
        ..SynthConfig::default()
    };
    generate(&cfg).unwrap()
}

pub fn reference_pipeline() -> matchnet::PipelineConfig {
    let mut cfg = matchnet::PipelineConfig::default();
    cfg.walk.num_walks = 500;
    cfg.walk.walk_length = 200;
    cfg.embed.d = 32;
    cfg
}

/// Season with the given records; every lineup gets five private players.
pub fn season_from(ids: &[u64], records: &[MatchupRecord]) -> SeasonDataset {
    let lineups = ids.iter().map(|&i| {
        let players = (0..5).map(|k| format!("l{i}p{k}")).collect::<Vec<_>>().join("|");
        matchnet::Lineup::parse(LineupId(i), &players).unwrap()
    });
    SeasonDataset::from_parts(lineups, records.iter().copied(), []).unwrap()
}
