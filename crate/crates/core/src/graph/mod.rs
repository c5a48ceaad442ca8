//! Undirected simple graphs, vertex sets and spanning subgraphs of cycle
//! blow-ups.
//!
//! Graphs are immutable once built. Algorithms that carve pieces out of a
//! host keep explicit "available" [`VertexSet`]s instead of deleting vertices.

mod io;
mod set;

pub use io::{
    parse_edge_list, parse_graph_json, parse_partitioned_json, read_graph, read_partitioned,
    write_edge_list, GraphFile, PartitionedFile,
};
pub use set::VertexSet;

use fixedbitset::FixedBitSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
    #[error("vertex sets overlap at vertex {0}")]
    Overlap(usize),
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("edge {u}-{v} joins non-consecutive parts {pu} and {pv}")]
    NonConsecutiveEdge { u: usize, v: usize, pu: usize, pv: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed graph file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Undirected simple graph on vertices `0..n`.
///
/// Keeps both sorted neighbor lists (for iteration) and an adjacency bit
/// matrix (for constant-time edge tests and set algebra).
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    matrix: Vec<FixedBitSet>,
    edge_count: usize,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.adj == other.adj
    }
}
impl Eq for Graph {}

impl Graph {
    /// Builds a graph from an edge list. Repeated edges are merged; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut matrix = vec![FixedBitSet::with_capacity(n); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::OutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            matrix[u].insert(v);
            matrix[v].insert(u);
        }
        let adj: Vec<Vec<usize>> = matrix.iter().map(|row| row.ones().collect()).collect();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Ok(Graph { adj, matrix, edge_count })
    }

    pub fn empty(n: usize) -> Graph {
        Graph::from_edges(n, std::iter::empty()).expect("edgeless graph is valid")
    }

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).expect("complete graph is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.matrix[u].contains(v)
    }

    /// Neighborhood of `v` as a bitset (borrowed row of the adjacency matrix).
    pub fn neighbor_bits(&self, v: usize) -> &FixedBitSet {
        &self.matrix[v]
    }

    pub fn neighbor_set(&self, v: usize) -> VertexSet {
        VertexSet::from_bits(self.matrix[v].clone())
    }

    /// `|N(v) ∩ set|`.
    pub fn degree_into(&self, v: usize, set: &VertexSet) -> usize {
        self.matrix[v].intersection_count(set.bits())
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::full(self.vertex_count())
    }
}

/// `N_G(X) = (∪_{v∈X} N(v)) \ X`, optionally intersected with `within`.
pub fn neighborhood(g: &Graph, x: &VertexSet, within: Option<&VertexSet>) -> VertexSet {
    let mut bits = FixedBitSet::with_capacity(g.vertex_count());
    for v in x.iter() {
        bits.union_with(g.neighbor_bits(v));
    }
    bits.difference_with(x.bits());
    if let Some(w) = within {
        bits.intersect_with(w.bits());
    }
    VertexSet::from_bits(bits)
}

/// `|E_G(A, B)|` for disjoint `a`, `b`.
pub fn edges_between(g: &Graph, a: &VertexSet, b: &VertexSet) -> Result<usize, GraphError> {
    if let Some(v) = a.iter().find(|&v| b.contains(v)) {
        return Err(GraphError::Overlap(v));
    }
    Ok(a.iter().map(|v| g.degree_into(v, b)).sum())
}

/// `G[S]` together with the map from new indices to old ones.
pub fn induced_subgraph(g: &Graph, s: &VertexSet) -> (Graph, Vec<usize>) {
    let old: Vec<usize> = s.iter().collect();
    let mut new_of = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in old.iter().enumerate() {
        new_of[v] = i;
    }
    let edges = old.iter().enumerate().flat_map(|(i, &v)| {
        let new_of = &new_of;
        g.neighbors(v)
            .iter()
            .filter(move |&&w| new_of[w] != usize::MAX && new_of[w] > i)
            .map(move |&w| (i, new_of[w]))
    });
    let sub = Graph::from_edges(old.len(), edges).expect("induced subgraph of a simple graph");
    (sub, old)
}

/// A spanning subgraph of the `part_size`-blow-up of `C_k`: `k` labelled parts
/// of equal size, edges only between cyclically consecutive parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionedGraph {
    k: usize,
    part_size: usize,
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
    graph: Graph,
}

impl PartitionedGraph {
    pub fn new(graph: Graph, parts: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let k = parts.len();
        if k < 3 {
            return Err(GraphError::BadPartition(format!("need at least 3 parts, got {k}")));
        }
        let part_size = parts[0].len();
        let n = graph.vertex_count();
        let mut part_of = vec![usize::MAX; n];
        for (i, part) in parts.iter().enumerate() {
            if part.len() != part_size {
                return Err(GraphError::BadPartition(format!(
                    "part {i} has size {} but part 0 has size {part_size}",
                    part.len()
                )));
            }
            for &v in part {
                if v >= n {
                    return Err(GraphError::OutOfRange { vertex: v, n });
                }
                if part_of[v] != usize::MAX {
                    return Err(GraphError::BadPartition(format!("vertex {v} in two parts")));
                }
                part_of[v] = i;
            }
        }
        if k * part_size != n {
            return Err(GraphError::BadPartition(format!(
                "{k} parts of size {part_size} do not cover {n} vertices"
            )));
        }
        for (u, v) in graph.edges() {
            let (pu, pv) = (part_of[u], part_of[v]);
            if (pu + 1) % k != pv && (pv + 1) % k != pu {
                return Err(GraphError::NonConsecutiveEdge { u, v, pu, pv });
            }
        }
        let mut parts = parts;
        for p in &mut parts {
            p.sort_unstable();
        }
        Ok(PartitionedGraph { k, part_size, parts, part_of, graph })
    }

    /// Parts are the index ranges `[i·n, (i+1)·n)`.
    pub fn contiguous<I>(k: usize, part_size: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let graph = Graph::from_edges(k * part_size, edges)?;
        let parts = (0..k).map(|i| (i * part_size..(i + 1) * part_size).collect()).collect();
        PartitionedGraph::new(graph, parts)
    }

    /// The complete `part_size`-blow-up of `C_k`.
    pub fn complete_blowup(k: usize, part_size: usize) -> Result<Self, GraphError> {
        let edges = (0..k).flat_map(move |i| {
            let j = (i + 1) % k;
            (0..part_size).flat_map(move |a| {
                (0..part_size).map(move |b| (i * part_size + a, j * part_size + b))
            })
        });
        PartitionedGraph::contiguous(k, part_size, edges)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn part_size(&self) -> usize {
        self.part_size
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[usize] {
        &self.parts[i % self.k]
    }

    pub fn part_set(&self, i: usize) -> VertexSet {
        VertexSet::from_iter(self.vertex_count(), self.part(i).iter().copied())
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.k
    }

    pub fn prev(&self, i: usize) -> usize {
        (i + self.k - 1) % self.k
    }

    /// True when `set` meets every part in the same number of vertices.
    pub fn is_balanced(&self, set: &VertexSet) -> bool {
        let mut counts = vec![0usize; self.k];
        for v in set.iter() {
            counts[self.part_of[v]] += 1;
        }
        counts.windows(2).all(|w| w[0] == w[1])
    }
}

/// `δ̄(G)`: the minimum over consecutive part pairs of the minimum degree of
/// the bipartite graph between them.
pub fn pair_min_degree(pg: &PartitionedGraph) -> usize {
    let g = pg.graph();
    let mut best = usize::MAX;
    for i in 0..pg.k() {
        let here = pg.part_set(i);
        let there = pg.part_set(pg.next(i));
        for &v in pg.part(i) {
            best = best.min(g.degree_into(v, &there));
        }
        for &v in pg.part(pg.next(i)) {
            best = best.min(g.degree_into(v, &here));
        }
    }
    if best == usize::MAX {
        0
    } else {
        best
    }
}
