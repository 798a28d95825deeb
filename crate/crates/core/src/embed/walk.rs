//! Second-order biased random walks over out-edges.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EmbedError;
use crate::data::LineupId;
use crate::network::MatchupNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    /// Return parameter; the previous node gets mass `1/p`.
    pub p: f64,
    /// In-out parameter; nodes not adjacent to the previous node get mass `1/q`.
    pub q: f64,
    /// Total number of walks over the whole network.
    pub num_walks: usize,
    /// Maximum hops per walk.
    pub walk_length: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            p: 0.5,
            q: 3.0,
            num_walks: 3000,
            walk_length: 3500,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::Config(m.to_owned()));
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad("walk.p must be positive");
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return bad("walk.q must be positive");
        }
        if self.num_walks == 0 {
            return bad("walk.num_walks must be at least 1");
        }
        if self.walk_length == 0 {
            return bad("walk.walk_length must be at least 1");
        }
        Ok(())
    }
}

/// Walk corpus over node indices of the network it was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Walks {
    ids: Vec<LineupId>,
    walks: Vec<Vec<usize>>,
}

impl Walks {
    pub fn new(ids: Vec<LineupId>, walks: Vec<Vec<usize>>) -> Self {
        debug_assert!(walks.iter().flatten().all(|&n| n < ids.len()));
        Self { ids, walks }
    }

    pub fn ids(&self) -> &[LineupId] {
        &self.ids
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn walks(&self) -> &[Vec<usize>] {
        &self.walks
    }

    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    /// Realized hop count of each walk.
    pub fn hop_counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.walks.iter().map(|w| w.len().saturating_sub(1))
    }

    pub fn mean_hops(&self) -> f64 {
        if self.walks.is_empty() {
            return 0.0;
        }
        self.hop_counts().sum::<usize>() as f64 / self.walks.len() as f64
    }
}

fn transition_masses(net: &MatchupNetwork, prev: Option<usize>, curr: usize, p: f64, q: f64) -> Vec<f64> {
    net.out_edges(curr)
        .iter()
        .map(|&(x, w)| match prev {
            None => w,
            Some(v) if x == v => w / p,
            Some(v) if net.has_edge(v, x) => w,
            Some(_) => w / q,
        })
        .collect()
}

/// Next-step distribution of a walk at `curr` that arrived from `prev`.
///
/// Returns `(neighbor, probability)` pairs over the out-neighbors of `curr`, or
/// `None` when `curr` is a dead end. The bias is measured from the previous
/// node: the previous node itself gets `1/p`, out-neighbors of the previous
/// node get `1`, everything else `1/q`, each times the edge weight.
pub fn transition_distribution(
    net: &MatchupNetwork,
    prev: Option<usize>,
    curr: usize,
    p: f64,
    q: f64,
) -> Option<Vec<(usize, f64)>> {
    if net.out_degree(curr) == 0 {
        return None;
    }
    let masses = transition_masses(net, prev, curr, p, q);
    let total: f64 = masses.iter().sum();
    Some(
        net.out_edges(curr)
            .iter()
            .zip(masses)
            .map(|(&(x, _), m)| (x, m / total))
            .collect(),
    )
}

enum Sampler {
    Single(usize),
    Alias(WeightedAliasIndex<f64>),
}

impl Sampler {
    fn build(net: &MatchupNetwork, prev: Option<usize>, curr: usize, p: f64, q: f64) -> Option<Self> {
        match net.out_edges(curr) {
            [] => None,
            [(only, _)] => Some(Sampler::Single(*only)),
            _ => {
                let masses = transition_masses(net, prev, curr, p, q);
                let table = WeightedAliasIndex::new(masses).expect("positive finite masses");
                Some(Sampler::Alias(table))
            }
        }
    }

    fn sample(&self, net: &MatchupNetwork, curr: usize, rng: &mut ChaCha8Rng) -> usize {
        match self {
            Sampler::Single(n) => *n,
            Sampler::Alias(t) => net.out_edges(curr)[t.sample(rng)].0,
        }
    }
}

/// Precomputed samplers: one per node for the first hop, one per edge for the
/// rest.
struct WalkTables {
    first: Vec<Option<Sampler>>,
    // indexed by edge id: offsets[src] + position of dst in out_edges(src)
    by_edge: Vec<Option<Sampler>>,
    offsets: Vec<usize>,
}

impl WalkTables {
    fn build(net: &MatchupNetwork, cfg: &WalkConfig) -> Self {
        let n = net.node_count();
        let first = (0..n).map(|c| Sampler::build(net, None, c, cfg.p, cfg.q)).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for v in 0..n {
            offsets.push(acc);
            acc += net.out_degree(v);
        }
        offsets.push(acc);
        let by_edge = net
            .edges()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(v, u, _)| Sampler::build(net, Some(v), u, cfg.p, cfg.q))
            .collect();
        Self {
            first,
            by_edge,
            offsets,
        }
    }

    fn next(&self, net: &MatchupNetwork, prev: Option<usize>, curr: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        let sampler = match prev {
            None => self.first[curr].as_ref(),
            Some(v) => {
                let pos = net
                    .out_edges(v)
                    .binary_search_by_key(&curr, |&(t, _)| t)
                    .expect("walk followed an existing edge");
                self.by_edge[self.offsets[v] + pos].as_ref()
            }
        }?;
        Some(sampler.sample(net, curr, rng))
    }
}

/// Generates `cfg.num_walks` walks, starting round-robin over nodes in id
/// order. Walk `i` draws from its own generator, seeded by `(cfg.seed, i)`, so
/// the corpus is identical however the walks are scheduled.
pub fn generate_walks(net: &MatchupNetwork, cfg: &WalkConfig) -> Result<Walks, EmbedError> {
    cfg.validate()?;
    if net.is_empty() {
        return Err(EmbedError::EmptyNetwork);
    }
    let tables = WalkTables::build(net, cfg);
    let n = net.node_count();
    let walks = (0..cfg.num_walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut walk = Vec::with_capacity(cfg.walk_length.min(4096) + 1);
            let mut prev = None;
            let mut curr = i % n;
            walk.push(curr);
            for _ in 0..cfg.walk_length {
                let Some(next) = tables.next(net, prev, curr, &mut rng) else {
                    break;
                };
                prev = Some(curr);
                curr = next;
                walk.push(curr);
            }
            walk
        })
        .collect();
    Ok(Walks::new(net.ids().to_vec(), walks))
}
