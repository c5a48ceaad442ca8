//! Embedding primitives: expander checks, tree embedding, f-matchings and
//! bipartite matchings.

mod expander;
mod fmatch;
mod matching;
mod tree_embed;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};

pub use expander::{
    check_expander, expander_threshold, ExpanderCertificate, ExpanderMode, ExpanderViolation, HeuristicCheck,
    EXPANDER_EXACT_CAP,
};
pub use fmatch::{f_matching, HallViolation, StarFamily};
pub use matching::{max_bipartite_matching, Bipartite, BipartiteMatching, LocalMatching};
pub use tree_embed::{embed_forest, embed_tree_in_expander, tree_room_check, TreeEmbedConfig};

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("vertex {0} lies in both sides")]
    Overlap(usize),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("no f-matching: a set of {} targets sees total demand {}", .0.w_prime.len(), .0.neighbor_capacity)]
    Infeasible(Box<HallViolation>),
    #[error("instance of size {size} exceeds the exact cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("search budget exhausted after placing {placed} of {total} vertices")]
    SearchExhausted { placed: usize, total: usize },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An injective partial map from pattern vertices to host vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "EmbeddingFile", try_from = "EmbeddingFile")]
pub struct Embedding {
    pub map: Vec<Option<usize>>,
    pub host_size: usize,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingFile {
    host_size: usize,
    map: Vec<i64>,
}

impl From<Embedding> for EmbeddingFile {
    fn from(e: Embedding) -> Self {
        EmbeddingFile { host_size: e.host_size, map: e.to_signed() }
    }
}

impl TryFrom<EmbeddingFile> for Embedding {
    type Error = String;

    fn try_from(f: EmbeddingFile) -> Result<Self, String> {
        let map = f
            .map
            .iter()
            .map(|&x| match x {
                -1 => Ok(None),
                x if x >= 0 && (x as usize) < f.host_size => Ok(Some(x as usize)),
                x => Err(format!("host index {x} out of range")),
            })
            .collect::<Result<_, _>>()?;
        Ok(Embedding { map, host_size: f.host_size })
    }
}

impl Embedding {
    pub fn empty(pattern_size: usize, host_size: usize) -> Self {
        Embedding { map: vec![None; pattern_size], host_size }
    }

    pub fn pattern_size(&self) -> usize {
        self.map.len()
    }

    pub fn mapped_count(&self) -> usize {
        self.map.iter().flatten().count()
    }

    pub fn is_complete(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// `pattern_index → host_index`, with −1 for unmapped vertices.
    pub fn to_signed(&self) -> Vec<i64> {
        self.map.iter().map(|m| m.map_or(-1, |h| h as i64)).collect()
    }

    /// Injectivity, and every pattern edge with both ends mapped lands on a
    /// host edge.
    pub fn verify(&self, pattern: &Graph, host: &Graph) -> Result<(), String> {
        if pattern.vertex_count() != self.map.len() {
            return Err(format!("map has {} entries, pattern has {} vertices", self.map.len(), pattern.vertex_count()));
        }
        let mut used = vec![false; host.vertex_count()];
        for (v, h) in self.map.iter().enumerate() {
            if let Some(h) = *h {
                if h >= host.vertex_count() {
                    return Err(format!("vertex {v} maps outside the host ({h})"));
                }
                if std::mem::replace(&mut used[h], true) {
                    return Err(format!("host vertex {h} used twice"));
                }
            }
        }
        for (u, v) in pattern.edges() {
            if let (Some(a), Some(b)) = (self.map[u], self.map[v]) {
                if !host.has_edge(a, b) {
                    return Err(format!("pattern edge {u}-{v} maps to non-edge {a}-{b}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_round_trips_as_signed_array() {
        let e = Embedding { map: vec![Some(3), None, Some(0)], host_size: 4 };
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"host_size":4,"map":[3,-1,0]}"#);
        assert_eq!(serde_json::from_str::<Embedding>(&json).unwrap(), e);
        assert!(serde_json::from_str::<Embedding>(r#"{"host_size":2,"map":[5]}"#).is_err());
    }

    #[test]
    fn verify_catches_defects() {
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let host = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let good = Embedding { map: vec![Some(1), Some(2), Some(3)], host_size: 4 };
        assert!(good.verify(&path, &host).is_ok());
        let clash = Embedding { map: vec![Some(1), Some(2), Some(1)], host_size: 4 };
        assert!(clash.verify(&path, &host).is_err());
        let non_edge = Embedding { map: vec![Some(0), Some(2), None], host_size: 4 };
        assert!(non_edge.verify(&path, &host).is_err());
    }
}
