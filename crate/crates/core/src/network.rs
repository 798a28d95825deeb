//! The weighted directed matchup network.
//!
//! Nodes are lineups, indexed by ascending lineup id. An edge `i -> j` exists
//! iff lineup `j` outperformed lineup `i` over their aggregate matchup, and its
//! weight is the absolute point margin per minute.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::data::{LineupId, MatchupRecord, SeasonDataset};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("edge {0} -> {1} has non-positive or non-finite weight {2}")]
    BadWeight(LineupId, LineupId, f64),
    #[error("self edge on lineup {0}")]
    SelfEdge(LineupId),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(LineupId, LineupId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Point margin per minute; positive means `lineup_a` outperformed.
pub fn margin_per_minute(rec: &MatchupRecord) -> f64 {
    rec.point_diff / rec.minutes
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchupNetwork {
    ids: Vec<LineupId>,
    index: BTreeMap<LineupId, usize>,
    // per source node, sorted by target index
    out: Vec<Vec<(usize, f64)>>,
}

impl MatchupNetwork {
    /// Builds a network over `ids` from `(source, target, weight)` triples.
    pub fn from_edges(
        ids: impl IntoIterator<Item = LineupId>,
        edges: impl IntoIterator<Item = (LineupId, LineupId, f64)>,
    ) -> Result<Self, NetworkError> {
        let mut ids: Vec<LineupId> = ids.into_iter().collect();
        let edges: Vec<_> = edges.into_iter().collect();
        ids.extend(edges.iter().flat_map(|&(s, t, _)| [s, t]));
        ids.sort();
        ids.dedup();
        let index: BTreeMap<LineupId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut out = vec![Vec::new(); ids.len()];
        for (src, dst, w) in edges {
            if src == dst {
                return Err(NetworkError::SelfEdge(src));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(NetworkError::BadWeight(src, dst, w));
            }
            out[index[&src]].push((index[&dst], w));
        }
        for (i, list) in out.iter_mut().enumerate() {
            list.sort_by_key(|&(t, _)| t);
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(NetworkError::DuplicateEdge(ids[i], ids[pair[0].0]));
            }
        }
        Ok(Self { ids, index, out })
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn ids(&self) -> &[LineupId] {
        &self.ids
    }

    pub fn id_of(&self, node: usize) -> LineupId {
        self.ids[node]
    }

    pub fn index_of(&self, id: LineupId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Out-neighbors of `node` with edge weights, sorted by target.
    pub fn out_edges(&self, node: usize) -> &[(usize, f64)] {
        &self.out[node]
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out[node].len()
    }

    /// Sum of out-edge weights.
    pub fn out_weight(&self, node: usize) -> f64 {
        self.out[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn weight(&self, src: usize, dst: usize) -> Option<f64> {
        self.out[src]
            .binary_search_by_key(&dst, |&(t, _)| t)
            .ok()
            .map(|k| self.out[src][k].1)
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.weight(src, dst).is_some()
    }

    /// Nodes with at least one incident edge.
    pub fn connected(&self) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        for (src, list) in self.out.iter().enumerate() {
            if !list.is_empty() {
                seen[src] = true;
            }
            for &(dst, _) in list {
                seen[dst] = true;
            }
        }
        seen
    }

    /// All edges as `(source, target, weight)` in source, then target order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, list)| list.iter().map(move |&(t, w)| (s, t, w)))
    }

    /// Writes the edge list as `src_lineup_id dst_lineup_id weight` lines.
    /// Nodes without edges are listed on a leading `# isolated` comment line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let isolated: Vec<String> = self
            .connected()
            .iter()
            .enumerate()
            .filter(|(_, c)| !**c)
            .map(|(i, _)| self.ids[i].to_string())
            .collect();
        if !isolated.is_empty() {
            writeln!(w, "# isolated {}", isolated.join(" "))?;
        }
        for (s, t, wt) in self.edges() {
            writeln!(w, "{} {} {}", self.ids[s], self.ids[t], wt)?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self, NetworkError> {
        let mut ids = Vec::new();
        let mut edges = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let parse_id = |tok: &str| {
                tok.parse::<u64>().map(LineupId).map_err(|_| NetworkError::Parse {
                    line: n + 1,
                    message: format!("bad lineup id {tok:?}"),
                })
            };
            if let Some(rest) = line.strip_prefix("# isolated") {
                for tok in rest.split_whitespace() {
                    ids.push(parse_id(tok)?);
                }
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(NetworkError::Parse {
                    line: n + 1,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let weight: f64 = fields[2].parse().map_err(|_| NetworkError::Parse {
                line: n + 1,
                message: format!("bad weight {:?}", fields[2]),
            })?;
            edges.push((parse_id(fields[0])?, parse_id(fields[1])?, weight));
        }
        Self::from_edges(ids, edges)
    }
}

/// Builds the matchup network of a season. Every lineup in the dataset becomes
/// a node; tied records add no edge.
pub fn build_network(ds: &SeasonDataset) -> MatchupNetwork {
    let edges = ds.matchups().iter().filter_map(|rec| {
        let m = margin_per_minute(rec);
        if m > 0.0 {
            Some((rec.lineup_b, rec.lineup_a, m))
        } else if m < 0.0 {
            Some((rec.lineup_a, rec.lineup_b, -m))
        } else {
            None
        }
    });
    MatchupNetwork::from_edges(ds.lineup_ids(), edges).expect("validated dataset yields a valid network")
}
