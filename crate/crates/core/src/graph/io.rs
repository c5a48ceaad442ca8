use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, PartitionedGraph};

/// On-disk form of a [`Graph`]: `{"n": .., "edges": [[u, v], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        GraphFile { n: g.vertex_count(), edges: g.edges().map(|(u, v)| [u, v]).collect() }
    }

    pub fn into_graph(self) -> Result<Graph, GraphError> {
        Graph::from_edges(self.n, self.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

/// On-disk form of a [`PartitionedGraph`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PartitionedFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub k: usize,
    pub part_size: usize,
    pub parts: Vec<Vec<usize>>,
}

impl PartitionedFile {
    pub fn from_partitioned(pg: &PartitionedGraph) -> Self {
        let g = GraphFile::from_graph(pg.graph());
        PartitionedFile {
            n: g.n,
            edges: g.edges,
            k: pg.k(),
            part_size: pg.part_size(),
            parts: pg.parts().to_vec(),
        }
    }

    pub fn into_partitioned(self) -> Result<PartitionedGraph, GraphError> {
        if self.parts.len() != self.k {
            return Err(GraphError::BadPartition(format!(
                "k = {} but {} parts listed",
                self.k,
                self.parts.len()
            )));
        }
        if self.parts.iter().any(|p| p.len() != self.part_size) {
            return Err(GraphError::BadPartition("part_size does not match parts".into()));
        }
        let g = GraphFile { n: self.n, edges: self.edges }.into_graph()?;
        PartitionedGraph::new(g, self.parts)
    }
}

/// Parses the "u v" per line format. The vertex count is one more than the
/// largest index seen (or `min_n` if larger).
pub fn parse_edge_list(text: &str, min_n: usize) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    let mut n = min_n;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != 2 {
            return Err(GraphError::Parse { line: i + 1, msg: format!("expected two indices, got {line:?}") });
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| GraphError::Parse { line: i + 1, msg: format!("{s:?}: {e}") })
        };
        let (u, v) = (parse(nums[0])?, parse(nums[1])?);
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    Graph::from_edges(n, edges)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("# n = {}\n", g.vertex_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn parse_graph_json(text: &str) -> Result<Graph, GraphError> {
    let f: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
    f.into_graph()
}

pub fn parse_partitioned_json(text: &str) -> Result<PartitionedGraph, GraphError> {
    let f: PartitionedFile =
        serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
    f.into_partitioned()
}

fn read_text(path: &Path) -> Result<String, GraphError> {
    std::fs::read_to_string(path).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))
}

/// Reads a graph, picking the format from the first non-blank character:
/// `{` means JSON, anything else is an edge list.
pub fn read_graph(path: &Path) -> Result<Graph, GraphError> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        parse_graph_json(&text)
    } else {
        parse_edge_list(&text, 0)
    }
}

pub fn read_partitioned(path: &Path) -> Result<PartitionedGraph, GraphError> {
    parse_partitioned_json(&read_text(path)?)
}
