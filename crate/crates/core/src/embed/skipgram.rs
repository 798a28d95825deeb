//! Skip-gram with negative sampling over a walk corpus.
//!
//! For every walk position, each node within `window` positions is a positive
//! context. Per positive pair the loss is
//!
//! ```text
//! -log σ(v·u⁺) - Σₖ log σ(-v·uₖ)
//! ```
//!
//! with `v` the input vector of the center node, `u⁺` the output vector of the
//! context node and `uₖ` output vectors of negatives drawn from walk-occurrence
//! counts raised to the 3/4 power. Plain SGD with a learning rate that decays
//! linearly to 1/100 of its initial value over all pair updates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{EmbedError, Embedding, Walks};
use crate::data::LineupId;

const LOSS_BUCKETS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    /// Embedding dimension.
    pub d: usize,
    /// Context radius in walk positions.
    pub window: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Passes over the walk corpus.
    pub epochs: usize,
    pub lr_initial: f64,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            d: 128,
            window: 10,
            negatives: 5,
            epochs: 1,
            lr_initial: 0.025,
            seed: 0,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::Config(m.to_owned()));
        if self.d == 0 {
            return bad("embed.d must be at least 1");
        }
        if self.window == 0 {
            return bad("embed.window must be at least 1");
        }
        if self.negatives == 0 {
            return bad("embed.negatives must be at least 1");
        }
        if self.epochs == 0 {
            return bad("embed.epochs must be at least 1");
        }
        if !(self.lr_initial > 0.0 && self.lr_initial.is_finite()) {
            return bad("embed.lr_initial must be positive");
        }
        Ok(())
    }
}

/// Output of [`train_embedding`].
#[derive(Debug, Clone)]
pub struct TrainedEmbedding {
    pub embedding: Embedding,
    /// Mean pair loss in up to 100 consecutive, equally sized slices of the
    /// update sequence.
    pub loss_curve: Vec<f64>,
    pub updates: u64,
    /// Nodes that never took part in a training pair; they get the zero vector.
    pub untrained: Vec<LineupId>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(x)`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss of one positive pair.
pub fn pair_loss(input: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    neg_log_sigmoid(dot(input, positive)) + negatives.iter().map(|u| neg_log_sigmoid(-dot(input, u))).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub input: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`pair_loss`] with respect to every vector involved.
pub fn pair_gradient(input: &[f64], positive: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let gp = sigmoid(dot(input, positive)) - 1.0;
    let gn: Vec<f64> = negatives.iter().map(|u| sigmoid(dot(input, u))).collect();
    let mut grad_input: Vec<f64> = positive.iter().map(|u| gp * u).collect();
    for (g, u) in gn.iter().zip(negatives) {
        for (acc, x) in grad_input.iter_mut().zip(*u) {
            *acc += g * x;
        }
    }
    PairGradient {
        input: grad_input,
        positive: input.iter().map(|v| gp * v).collect(),
        negatives: gn.iter().map(|g| input.iter().map(|v| g * v).collect()).collect(),
    }
}

/// One SGD step on a positive pair, in place. `outputs` holds output vectors
/// row-major with `input.len()` columns; `positive` and `negatives` index rows.
/// All gradients are taken at the pre-update point. Returns the pair loss
/// before the step.
pub fn sgd_step(
    input: &mut [f64],
    outputs: &mut [f64],
    positive: usize,
    negatives: &[usize],
    lr: f64,
    scratch: &mut Vec<f64>,
) -> f64 {
    let d = input.len();
    let row = |k: usize| k * d..(k + 1) * d;
    scratch.clear();
    scratch.resize(d, 0.0);

    let targets = std::iter::once((positive, true)).chain(negatives.iter().map(|&n| (n, false)));
    let mut coefs = Vec::with_capacity(negatives.len() + 1);
    let mut loss = 0.0;
    for (k, is_positive) in targets {
        let s = dot(input, &outputs[row(k)]);
        let (g, l) = if is_positive {
            (sigmoid(s) - 1.0, neg_log_sigmoid(s))
        } else {
            (sigmoid(s), neg_log_sigmoid(-s))
        };
        loss += l;
        for (acc, u) in scratch.iter_mut().zip(&outputs[row(k)]) {
            *acc += g * u;
        }
        coefs.push((k, g));
    }
    for (k, g) in coefs {
        for (u, v) in outputs[row(k)].iter_mut().zip(input.iter()) {
            *u -= lr * g * v;
        }
    }
    for (v, g) in input.iter_mut().zip(scratch.iter()) {
        *v -= lr * g;
    }
    loss
}

fn context_range(len: usize, i: usize, window: usize) -> std::ops::Range<usize> {
    i.saturating_sub(window)..(i + window + 1).min(len)
}

/// Trains input-side skip-gram vectors on `walks`. Single-threaded and fully
/// determined by `cfg.seed`.
pub fn train_embedding(walks: &Walks, cfg: &EmbedConfig) -> Result<TrainedEmbedding, EmbedError> {
    cfg.validate()?;
    if walks.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let n = walks.node_count();
    let d = cfg.d;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut input: Vec<f64> = (0..n * d).map(|_| (rng.random::<f64>() - 0.5) / d as f64).collect();
    let mut output = vec![0.0; n * d];

    let mut counts = vec![0u64; n];
    let mut pairs_per_epoch = 0u64;
    for walk in walks.walks() {
        for (i, &node) in walk.iter().enumerate() {
            counts[node] += 1;
            pairs_per_epoch += context_range(walk.len(), i, cfg.window).len() as u64 - 1;
        }
    }
    if pairs_per_epoch == 0 {
        log::warn!("walk corpus has no context pairs; every vector is zero");
        let mut embedding = Embedding::new(d);
        for &id in walks.ids() {
            embedding.insert(id, vec![0.0; d]);
        }
        return Ok(TrainedEmbedding {
            embedding,
            loss_curve: Vec::new(),
            updates: 0,
            untrained: walks.ids().to_vec(),
        });
    }
    let noise = WeightedAliasIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75)).collect())
        .expect("corpus has occurrences");

    let total = pairs_per_epoch * cfg.epochs as u64;
    let buckets = LOSS_BUCKETS.min(total as usize);
    let mut loss_sum = vec![0.0; buckets];
    let mut loss_n = vec![0u64; buckets];
    let mut trained = vec![false; n];
    let mut negs = Vec::with_capacity(cfg.negatives);
    let mut scratch = Vec::with_capacity(d);
    let mut t = 0u64;

    for _ in 0..cfg.epochs {
        for walk in walks.walks() {
            for (i, &center) in walk.iter().enumerate() {
                for j in context_range(walk.len(), i, cfg.window) {
                    if j == i {
                        continue;
                    }
                    let context = walk[j];
                    negs.clear();
                    for _ in 0..cfg.negatives {
                        let k = noise.sample(&mut rng);
                        if k != context {
                            negs.push(k);
                        }
                    }
                    let lr = cfg.lr_initial * (1.0 - 0.99 * t as f64 / total as f64);
                    let loss = sgd_step(
                        &mut input[center * d..(center + 1) * d],
                        &mut output,
                        context,
                        &negs,
                        lr,
                        &mut scratch,
                    );
                    let b = (t as u128 * buckets as u128 / total as u128) as usize;
                    loss_sum[b] += loss;
                    loss_n[b] += 1;
                    trained[center] = true;
                    trained[context] = true;
                    t += 1;
                }
            }
        }
    }

    let mut embedding = Embedding::new(d);
    let mut untrained = Vec::new();
    for (node, &id) in walks.ids().iter().enumerate() {
        if trained[node] {
            embedding.insert(id, input[node * d..(node + 1) * d].to_vec());
        } else {
            untrained.push(id);
            embedding.insert(id, vec![0.0; d]);
        }
    }
    if !untrained.is_empty() {
        log::warn!(
            "{} lineups never appeared in a training pair; using zero vectors",
            untrained.len()
        );
    }
    Ok(TrainedEmbedding {
        embedding,
        loss_curve: loss_sum
            .iter()
            .zip(&loss_n)
            .map(|(s, &c)| s / c.max(1) as f64)
            .collect(),
        updates: t,
        untrained,
    })
}
