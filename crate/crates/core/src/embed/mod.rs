//! Node embeddings learned from second-order biased random walks.
//!
//! [`generate_walks`] produces a walk corpus over the matchup network and
//! [`train_embedding`] fits skip-gram vectors with negative sampling on it.

mod skipgram;
mod walk;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::data::LineupId;

pub use skipgram::{pair_gradient, pair_loss, sgd_step, train_embedding, EmbedConfig, PairGradient, TrainedEmbedding};
pub use walk::{generate_walks, transition_distribution, WalkConfig, Walks};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot walk an empty network")]
    EmptyNetwork,
    #[error("walk corpus is empty")]
    EmptyCorpus,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Mapping from lineup to a real vector of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    dim: usize,
    vectors: BTreeMap<LineupId, Vec<f64>>,
}

impl Embedding {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: LineupId) -> Option<&[f64]> {
        self.vectors.get(&id).map(Vec::as_slice)
    }

    pub fn contains(&self, id: LineupId) -> bool {
        self.vectors.contains_key(&id)
    }

    /// Inserts or replaces a vector.
    ///
    /// # Panics
    /// If `vector` does not have length `dim` or holds non-finite values.
    pub fn insert(&mut self, id: LineupId, vector: Vec<f64>) {
        assert_eq!(vector.len(), self.dim, "embedding dimension mismatch");
        assert!(vector.iter().all(|v| v.is_finite()), "non-finite embedding entry");
        self.vectors.insert(id, vector);
    }

    pub fn iter(&self) -> impl Iterator<Item = (LineupId, &[f64])> {
        self.vectors.iter().map(|(id, v)| (*id, v.as_slice()))
    }

    /// One line per node: `lineup_id v1 v2 ... vd`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, v) in &self.vectors {
            write!(w, "{id}")?;
            for x in v {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self, EmbedError> {
        let mut dim = None;
        let mut vectors = BTreeMap::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(id) = fields.next() else { continue };
            let err = |message: String| EmbedError::Parse { line: n + 1, message };
            let id: u64 = id.parse().map_err(|_| err(format!("bad lineup id {id:?}")))?;
            let v = fields
                .map(|f| f.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err("bad vector entry".into()))?;
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => return Err(err(format!("expected {d} entries, found {}", v.len()))),
                _ => {}
            }
            vectors.insert(LineupId(id), v);
        }
        Ok(Self {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }
}
