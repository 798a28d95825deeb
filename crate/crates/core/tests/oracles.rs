//! Fitted quantities checked against brute-force or closed-form references
//! computed here from first principles.

mod common;

use matchnet::baselines::{compute_apm, fit_scalar_model};
use matchnet::bt::{self, FitWarning, TrainingPair, SEPARABLE_L2};
use matchnet::data::{LineupId, MatchupRecord};
use matchnet::embed::{generate_walks, train_embedding, EmbedConfig, WalkConfig};
use matchnet::eval::calibration;
use matchnet::network::MatchupNetwork;
use matchnet::synth::{generate, SynthConfig};
use rand::Rng;

fn log_sigmoid(s: f64) -> f64 {
    -(-s).exp().ln_1p()
}

/// Maximizes a concave 1-d function on `[lo, hi]` by refining grids.
fn grid_max_1d(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..6 {
        let step = (hi - lo) / 200.0;
        let best = (0..=200)
            .map(|k| lo + step * k as f64)
            .max_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        lo = best - step;
        hi = best + step;
    }
    (lo + hi) / 2.0
}

#[test]
fn bt_coefficient_matches_grid_search() {
    let mut pairs = vec![TrainingPair::new(&[1.0], &[0.0], true); 50];
    pairs.extend(vec![TrainingPair::new(&[0.0], &[1.0], false); 50]);
    let fit = bt::fit(&pairs, 1.0).unwrap();
    // 100 log σ(β) - β²/2
    let beta = grid_max_1d(|b| 100.0 * log_sigmoid(b) - 0.5 * b * b, 0.0, 20.0);
    let got = fit.model.coefficients()[0];
    assert!(got > 0.0);
    assert!((got - beta).abs() < 1e-4, "fit {got}, grid {beta}");
    assert!(fit.grad_max_norm <= 1e-6);
    assert!(fit.warning.is_none());
}

#[test]
fn bt_zero_features_give_zero_model() {
    let pairs: Vec<_> = (0..10)
        .map(|i| TrainingPair::new(&[0.0; 3], &[0.0; 3], i % 3 == 0))
        .collect();
    let fit = bt::fit(&pairs, 1.0).unwrap();
    assert!(fit.model.coefficients().iter().all(|&c| c == 0.0));
    assert_eq!(fit.model.predict(&[1.0, 2.0, 3.0], &[0.0; 3]).unwrap(), 0.5);
}

fn random_pairs(seed: u64, n: usize, d: usize) -> Vec<TrainingPair> {
    let mut rng = common::rng(seed);
    let truth: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    (0..n)
        .map(|_| {
            let xi: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let xj: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s: f64 = truth
                .iter()
                .zip(xi.iter().zip(&xj))
                .map(|(b, (a, c))| b * (a - c))
                .sum();
            let label = rng.random::<f64>() < 1.0 / (1.0 + (-s).exp());
            TrainingPair::new(&xi, &xj, label)
        })
        .collect()
}

#[test]
fn bt_duplicated_data_keeps_unpenalized_optimum() {
    let pairs = random_pairs(3, 200, 3);
    let once = bt::fit(&pairs, 0.0).unwrap();
    let twice = bt::fit(&[pairs.clone(), pairs].concat(), 0.0).unwrap();
    assert!(once.warning.is_none());
    for (a, b) in once.model.coefficients().iter().zip(twice.model.coefficients()) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(twice.grad_max_norm <= 1e-6);
}

#[test]
fn bt_separable_labels_fall_back_to_tiny_ridge() {
    let pairs: Vec<_> = (0..20)
        .map(|i| TrainingPair::new(&[1.0 + i as f64], &[0.0], true))
        .collect();
    let fit = bt::fit(&pairs, 0.0).unwrap();
    assert_eq!(fit.warning, Some(FitWarning::Separable));
    assert_eq!(fit.model.l2(), SEPARABLE_L2);
    assert!(fit.model.coefficients()[0] > 0.0 && fit.model.coefficients()[0].is_finite());
}

#[test]
fn scalar_model_matches_two_parameter_grid_search() {
    let mut rng = common::rng(17);
    let data: Vec<(f64, bool)> = (0..20)
        .map(|_| {
            let delta = rng.random_range(-2.0..2.0);
            (
                delta,
                rng.random::<f64>() < 1.0 / (1.0 + (-(1.5 * delta + 0.3_f64)).exp()),
            )
        })
        .collect();
    let ll = |a: f64, b: f64| -> f64 {
        data.iter()
            .map(|&(d, y)| {
                let s = a * d + b;
                if y {
                    log_sigmoid(s)
                } else {
                    log_sigmoid(-s)
                }
            })
            .sum()
    };
    let (mut a0, mut b0, mut half) = (0.0, 0.0, 8.0);
    for _ in 0..8 {
        let step = half / 50.0;
        let mut best = (f64::NEG_INFINITY, a0, b0);
        for i in -50..=50 {
            for j in -50..=50 {
                let (a, b) = (a0 + step * i as f64, b0 + step * j as f64);
                let v = ll(a, b);
                if v > best.0 {
                    best = (v, a, b);
                }
            }
        }
        (a0, b0, half) = (best.1, best.2, 2.0 * step);
    }
    let fit = fit_scalar_model(&data).unwrap();
    assert!(fit.warning.is_none());
    assert!((fit.model.slope - a0).abs() < 1e-3, "slope {} vs {a0}", fit.model.slope);
    assert!(
        (fit.model.intercept - b0).abs() < 1e-3,
        "intercept {} vs {b0}",
        fit.model.intercept
    );
}

#[test]
fn scalar_model_constant_feature_predicts_half() {
    let data: Vec<(f64, bool)> = (0..10).map(|i| (0.0, i % 2 == 0)).collect();
    let fit = fit_scalar_model(&data).unwrap();
    assert!((fit.model.predict(3.0) - 0.5).abs() < 1e-12);
}

#[test]
fn apm_matches_weighted_ridge_normal_equations() {
    let (ds, _) = generate(&SynthConfig {
        n_teams: 3,
        lineups_per_team: 3,
        ..SynthConfig::default()
    })
    .unwrap();
    let ridge = 2.5;
    let ratings = compute_apm(&ds, ridge).unwrap();
    let players: Vec<_> = ratings.iter().map(|(p, _)| p.clone()).collect();
    let col = |p: &matchnet::PlayerId| players.iter().position(|q| q == p).unwrap();
    let k = players.len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for m in ds.matchups() {
        let mut row = vec![0.0; k];
        for p in ds.lineup(m.lineup_a).unwrap().players() {
            row[col(p)] = 1.0;
        }
        for p in ds.lineup(m.lineup_b).unwrap().players() {
            row[col(p)] = -1.0;
        }
        let y = m.point_diff / m.minutes * 48.0;
        for i in 0..k {
            xty[i] += m.minutes * row[i] * y;
            for j in 0..k {
                xtx[i][j] += m.minutes * row[i] * row[j];
            }
        }
    }
    for (i, r) in xtx.iter_mut().enumerate() {
        r[i] += ridge;
    }
    let want = common::solve_dense(xtx, xty);
    for (p, got) in ratings.iter() {
        assert!((got - want[col(p)]).abs() < 1e-9, "{p}: {got} vs {}", want[col(p)]);
    }
}

#[test]
fn apm_single_record_minimum_norm() {
    let rec = MatchupRecord::oriented(LineupId(1), LineupId(2), 48.0, 10.0);
    let ds = common::season_from(&[1, 2], &[rec]);
    let r = compute_apm(&ds, 0.0).unwrap();
    // a = p·y/‖p‖² with y = 10 and ‖p‖² = 10
    for (p, v) in r.iter() {
        let want = if p.as_str().starts_with("l1") { 1.0 } else { -1.0 };
        assert!((v - want).abs() < 1e-9);
    }
}

#[test]
fn calibration_line_matches_weighted_least_squares() {
    let mut rng = common::rng(23);
    let preds: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
    let labels: Vec<bool> = preds.iter().map(|p| rng.random::<f64>() < *p * 0.8 + 0.1).collect();
    let curve = calibration(&preds, &labels).unwrap();
    let pts: Vec<(f64, f64, f64)> = curve
        .bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.predicted_mean.unwrap(), b.empirical_rate.unwrap(), b.count as f64))
        .collect();
    let w: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / w;
    let my = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / w;
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    let line = curve.line.unwrap();
    assert!((line.slope - sxy / sxx).abs() < 1e-12);
    assert!((line.intercept - (my - sxy / sxx * mx)).abs() < 1e-12);
}

/// Two ten-node groups with reciprocal edges inside each and a single
/// reciprocal bridge between them.
fn two_blocks(seed: u64) -> MatchupNetwork {
    let mut rng = common::rng(seed);
    let mut edges = Vec::new();
    for block in 0..2u64 {
        for i in 0..10u64 {
            for j in 0..10u64 {
                if i != j && rng.random::<f64>() < 0.6 {
                    edges.push((
                        LineupId(block * 10 + i),
                        LineupId(block * 10 + j),
                        rng.random_range(0.5..2.0),
                    ));
                }
            }
        }
    }
    edges.retain(|&(s, t, _)| !(s == LineupId(0) && t == LineupId(10)) && !(s == LineupId(10) && t == LineupId(0)));
    edges.push((LineupId(0), LineupId(10), 1.0));
    edges.push((LineupId(10), LineupId(0), 1.0));
    MatchupNetwork::from_edges((0..20).map(LineupId), edges).unwrap()
}

#[test]
fn planted_blocks_embed_closer_within_groups() {
    let mut separated = 0;
    for seed in 0..20 {
        let net = two_blocks(seed);
        let walks = generate_walks(
            &net,
            &WalkConfig {
                num_walks: 200,
                walk_length: 40,
                seed,
                ..WalkConfig::default()
            },
        )
        .unwrap();
        let emb = train_embedding(
            &walks,
            &EmbedConfig {
                d: 16,
                seed,
                ..EmbedConfig::default()
            },
        )
        .unwrap()
        .embedding;
        let (mut within, mut across) = ((0.0, 0), (0.0, 0));
        for i in 0..20u64 {
            for j in i + 1..20 {
                let (x, y) = (emb.get(LineupId(i)).unwrap(), emb.get(LineupId(j)).unwrap());
                let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let acc = if (i < 10) == (j < 10) { &mut within } else { &mut across };
                acc.0 += dist;
                acc.1 += 1;
            }
        }
        if within.0 / f64::from(within.1) < across.0 / f64::from(across.1) {
            separated += 1;
        }
    }
    assert!(separated >= 18, "{separated}/20 seeds separated the blocks");
}

#[test]
fn skipgram_loss_decreases() {
    let net = two_blocks(99);
    let walks = generate_walks(
        &net,
        &WalkConfig {
            num_walks: 200,
            walk_length: 40,
            ..WalkConfig::default()
        },
    )
    .unwrap();
    let trained = train_embedding(
        &walks,
        &EmbedConfig {
            d: 16,
            ..EmbedConfig::default()
        },
    )
    .unwrap();
    let curve = &trained.loss_curve;
    let k = curve.len() / 10;
    let first = curve[..k].iter().sum::<f64>() / k as f64;
    let last = curve[curve.len() - k..].iter().sum::<f64>() / k as f64;
    assert!(last < first, "first decile {first}, last decile {last}");
}

#[test]
fn stronger_lineup_wins_more_as_gap_grows() {
    let cfg = SynthConfig {
        n_teams: 20,
        lineups_per_team: 10,
        matchup_density: 1.0,
        ..SynthConfig::default()
    };
    let (ds, truth) = generate(&cfg).unwrap();
    let mut obs: Vec<(f64, bool)> = ds
        .labeled()
        .map(|m| {
            let gap = truth.ability(m.lineup_a) - truth.ability(m.lineup_b);
            (gap.abs(), (gap > 0.0) == m.label().unwrap())
        })
        .collect();
    assert!(obs.len() >= 10_000);
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rates: Vec<f64> = obs
        .chunks(obs.len().div_ceil(10))
        .map(|c| c.iter().filter(|o| o.1).count() as f64 / c.len() as f64)
        .collect();
    let violations = rates.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(violations <= 2, "win rates by gap decile: {rates:?}");
    assert!(rates[rates.len() - 1] > rates[0]);
}

#[test]
fn noiseless_oracle_is_perfect_and_noise_lowers_it() {
    let (ds, truth) = generate(&SynthConfig {
        noise_sd: 0.0,
        ..SynthConfig::default()
    })
    .unwrap();
    assert_eq!(truth.oracle_accuracy(ds.matchups()), 1.0);
    let (ds, truth) = generate(&SynthConfig::default()).unwrap();
    let acc = truth.oracle_accuracy(ds.matchups());
    assert!(acc > 0.5 && acc < 1.0);
}
