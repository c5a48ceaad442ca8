//! Transversal `C_k`-factors in spanning subgraphs of blow-ups of `C_k`:
//! paths and cycles, exact solvers, tilings, absorbers and absorbing sets.

mod absorb;
mod chain;
mod cycle;
mod exact;
mod regular;
mod tiling;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EmbedError;
use crate::graph::{GraphError, PartitionedGraph, VertexSet};

pub use absorb::{
    absorb, build_absorbing_set, build_fan, build_template, find_absorber, find_connector, Absorber, AbsorberKind,
    AbsorbingConfig, AbsorbingSet, Connector, Fan, Template, TemplateKind, random_leftover, TEMPLATE_MAX_DEGREE,
};
pub use chain::matching_chain;
pub use cycle::{transversal_cycle_through, transversal_path, transversal_path_between};
pub use exact::{exact_max_tiling, exact_transversal_factor, EXACT_FACTOR_CAP, EXACT_PART_CAP};
pub use regular::{regular_pair_check, RegularPairReport};
pub use tiling::{
    almost_tiling, transversal_factor, BlockPartition, CopyReport, FactorParams, FactorRoute, FactorRun, TilingReport,
    TilingStrategy,
};

#[derive(Debug, Error, PartialEq)]
pub enum FactorError {
    #[error("invalid transversal cycle: {0}")]
    InvalidCycle(String),
    #[error("vertex {0} used twice")]
    Overlap(usize),
    #[error("coverage mismatch: {0}")]
    Coverage(String),
    #[error("set is not balanced across parts")]
    Unbalanced,
    #[error("instance exceeds the exact cap: {0}")]
    TooLarge(String),
    #[error("transversal path died at part {part}")]
    PropagationDied { part: usize },
    #[error("no transversal cycle through the given anchors")]
    NoCycle,
    #[error("stage `{stage}` starved (short by {shortfall})")]
    Starved { stage: String, shortfall: usize },
    #[error("no transversal factor exists")]
    NoFactor,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A copy of `C_k` with `vertices[i]` in part `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransversalCycle {
    pub vertices: Vec<usize>,
}

impl TransversalCycle {
    pub fn new(pg: &PartitionedGraph, vertices: Vec<usize>) -> Result<Self, FactorError> {
        let c = TransversalCycle { vertices };
        c.validate(pg)?;
        Ok(c)
    }

    pub fn validate(&self, pg: &PartitionedGraph) -> Result<(), FactorError> {
        let k = pg.k();
        if self.vertices.len() != k {
            return Err(FactorError::InvalidCycle(format!("{} vertices for k = {k}", self.vertices.len())));
        }
        for (i, &v) in self.vertices.iter().enumerate() {
            if v >= pg.vertex_count() || pg.part_of(v) != i {
                return Err(FactorError::InvalidCycle(format!("vertex {v} is not in part {i}")));
            }
            let w = self.vertices[(i + 1) % k];
            if !pg.graph().has_edge(v, w) {
                return Err(FactorError::InvalidCycle(format!("missing edge {v}-{w}")));
            }
        }
        Ok(())
    }
}

/// Checks that `cycles` are valid, pairwise disjoint and cover exactly `target`.
pub fn verify_factor(pg: &PartitionedGraph, cycles: &[TransversalCycle], target: &VertexSet) -> Result<(), FactorError> {
    let covered = check_disjoint(pg, cycles)?;
    if &covered != target {
        let missing = target.iter().find(|&v| !covered.contains(v));
        let extra = covered.iter().find(|&v| !target.contains(v));
        return Err(FactorError::Coverage(format!(
            "covered {} of {} (first missing {missing:?}, first extra {extra:?})",
            covered.len(),
            target.len()
        )));
    }
    Ok(())
}

/// Validates every cycle and their disjointness; returns the covered set.
pub fn check_disjoint(pg: &PartitionedGraph, cycles: &[TransversalCycle]) -> Result<VertexSet, FactorError> {
    let mut covered = VertexSet::new(pg.vertex_count());
    for c in cycles {
        c.validate(pg)?;
        for &v in &c.vertices {
            if !covered.insert(v) {
                return Err(FactorError::Overlap(v));
            }
        }
    }
    Ok(covered)
}

/// Vertex-disjoint transversal cycles plus the vertices they leave out of
/// the tiled domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub cycles: Vec<TransversalCycle>,
    pub uncovered: VertexSet,
}

impl Tiling {
    pub fn validate(&self, pg: &PartitionedGraph, domain: &VertexSet) -> Result<(), FactorError> {
        let covered = check_disjoint(pg, &self.cycles)?;
        if !covered.is_disjoint(&self.uncovered) {
            return Err(FactorError::Coverage("uncovered set meets the tiling".into()));
        }
        let mut all = covered;
        all.union_with(&self.uncovered);
        if &all != domain {
            return Err(FactorError::Coverage("tiling plus uncovered differs from the domain".into()));
        }
        Ok(())
    }

    pub fn covered_count(&self) -> usize {
        self.cycles.len() * self.cycles.first().map_or(0, |c| c.vertices.len())
    }
}

/// Per-part vertex lists of `set`, or `Unbalanced` if their sizes differ.
pub fn balanced_parts(pg: &PartitionedGraph, set: &VertexSet) -> Result<Vec<Vec<usize>>, FactorError> {
    let mut parts = vec![Vec::new(); pg.k()];
    for v in set.iter() {
        parts[pg.part_of(v)].push(v);
    }
    if parts.iter().any(|p| p.len() != parts[0].len()) {
        return Err(FactorError::Unbalanced);
    }
    Ok(parts)
}
