use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::data::SeasonDataset;

/// Smallest number of labelled records a split accepts.
pub const MIN_LABELED: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Uniform random train/test partition of the labelled records. Tied records
/// always go to the training side; both sides keep the full lineup table.
pub fn split(ds: &SeasonDataset, spec: &SplitSpec) -> Result<(SeasonDataset, SeasonDataset), EvalError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(EvalError::TrainFraction(spec.train_fraction));
    }
    let (mut labeled, ties): (Vec<_>, Vec<_>) = ds.matchups().iter().copied().partition(|m| m.label().is_some());
    if labeled.is_empty() {
        return Err(EvalError::NoLabels);
    }
    if labeled.len() < MIN_LABELED {
        return Err(EvalError::TooFew(labeled.len()));
    }
    let n = labeled.len();
    let n_test = ((n as f64 * (1.0 - spec.train_fraction)).round() as usize).clamp(1, n - 1);
    labeled.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let test = labeled.split_off(n - n_test);
    labeled.extend(ties);
    Ok((ds.with_matchups(labeled), ds.with_matchups(test)))
}
