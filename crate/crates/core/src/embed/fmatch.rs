//! f-matchings (vertex-disjoint stars with prescribed leaf counts) via
//! maximum flow, with a Hall-violation witness on infeasible inputs.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::EmbedError;
use crate::graph::{Graph, VertexSet};

/// Dinic's algorithm on a small adjacency-list network.
#[derive(Clone, Debug)]
pub(crate) struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new() }
    }

    /// Adds `u → v` with capacity `c`; returns the arc id (its reverse is `id ^ 1`).
    pub(crate) fn add_arc(&mut self, u: usize, v: usize, c: u64) -> usize {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id
    }

    pub(crate) fn flow_on(&self, arc: usize) -> u64 {
        self.cap[arc ^ 1]
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.head.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, limit: u64, level: &[usize], it: &mut [usize]) -> u64 {
        if u == t {
            return limit;
        }
        while it[u] < self.head[u].len() {
            let a = self.head[u][it[u]];
            let v = self.to[a];
            if self.cap[a] > 0 && level[v] == level[u] + 1 {
                let got = self.push(v, t, limit.min(self.cap[a]), level, it);
                if got > 0 {
                    self.cap[a] -= got;
                    self.cap[a ^ 1] += got;
                    return got;
                }
            }
            it[u] += 1;
        }
        0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0; self.head.len()];
            loop {
                let got = self.push(s, t, u64::MAX, &level, &mut it);
                if got == 0 {
                    break;
                }
                total += got;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network (source side of a
    /// minimum cut once the flow is maximum).
    pub(crate) fn residual_reach(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != usize::MAX).collect()
    }
}

/// Vertex-disjoint stars: `stars[u]` lists the leaves of the star at `u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarFamily {
    pub stars: BTreeMap<usize, Vec<usize>>,
}

impl StarFamily {
    pub fn verify(&self, g: &Graph, w_set: &VertexSet, f: &BTreeMap<usize, usize>) -> Result<(), String> {
        let mut seen = VertexSet::new(g.vertex_count());
        for (&u, leaves) in &self.stars {
            if f.get(&u) != Some(&leaves.len()) {
                return Err(format!("star at {u} has {} leaves, f = {:?}", leaves.len(), f.get(&u)));
            }
            for &w in leaves {
                if !w_set.contains(w) || !g.has_edge(u, w) || !seen.insert(w) {
                    return Err(format!("bad leaf {w} at {u}"));
                }
            }
        }
        if seen.len() != w_set.len() {
            return Err(format!("covered {} of {} targets", seen.len(), w_set.len()));
        }
        Ok(())
    }
}

/// `W′ ⊆ W` whose neighbors in `U` have total demand below `|W′|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallViolation {
    pub w_prime: VertexSet,
    pub neighbor_capacity: usize,
    pub max_covered: usize,
}

impl HallViolation {
    pub fn verify(&self, g: &Graph, u_set: &VertexSet, f: &BTreeMap<usize, usize>) -> bool {
        let mut nb = VertexSet::new(g.vertex_count());
        for w in self.w_prime.iter() {
            for &u in g.neighbors(w) {
                if u_set.contains(u) {
                    nb.insert(u);
                }
            }
        }
        let cap: usize = nb.iter().map(|u| f.get(&u).copied().unwrap_or(0)).sum();
        cap == self.neighbor_capacity && cap < self.w_prime.len()
    }
}

fn check_inputs(g: &Graph, u_set: &VertexSet, w_set: &VertexSet, f: &BTreeMap<usize, usize>) -> Result<(), EmbedError> {
    if let Some(v) = u_set.iter().find(|&v| w_set.contains(v)) {
        return Err(EmbedError::Overlap(v));
    }
    for u in u_set.iter() {
        match f.get(&u) {
            Some(&c) if c >= 1 => {}
            _ => return Err(EmbedError::BadInput(format!("f({u}) must be at least 1"))),
        }
    }
    if let Some(u) = f.keys().find(|&&u| !u_set.contains(u) || u >= g.vertex_count()) {
        return Err(EmbedError::BadInput(format!("f is defined at {u} outside U")));
    }
    let total: usize = f.values().sum();
    if total != w_set.len() {
        return Err(EmbedError::BadInput(format!("sum of f is {total} but |W| = {}", w_set.len())));
    }
    Ok(())
}

/// An `f`-matching from `U` into `W`, or a Hall-violation witness. Arcs
/// `u → w` carry unbounded capacity so that a minimum cut never cuts them,
/// which turns the sink side of the cut into the witness `W′`.
pub fn f_matching(
    g: &Graph,
    u_set: &VertexSet,
    w_set: &VertexSet,
    f: &BTreeMap<usize, usize>,
) -> Result<StarFamily, EmbedError> {
    check_inputs(g, u_set, w_set, f)?;
    let us: Vec<usize> = u_set.iter().collect();
    let ws: Vec<usize> = w_set.iter().collect();
    let mut w_index = vec![usize::MAX; g.vertex_count()];
    for (i, &w) in ws.iter().enumerate() {
        w_index[w] = i;
    }
    let (s, t) = (0, 1);
    let u_node = |i: usize| 2 + i;
    let w_node = |j: usize| 2 + us.len() + j;
    let mut net = FlowNetwork::new(2 + us.len() + ws.len());
    for (i, &u) in us.iter().enumerate() {
        net.add_arc(s, u_node(i), f[&u] as u64);
    }
    let mut uw_arcs = Vec::new();
    for (i, &u) in us.iter().enumerate() {
        for &w in g.neighbors(u) {
            if w_index[w] != usize::MAX {
                let a = net.add_arc(u_node(i), w_node(w_index[w]), u64::MAX / 4);
                uw_arcs.push((a, u, w));
            }
        }
    }
    for j in 0..ws.len() {
        net.add_arc(w_node(j), t, 1);
    }
    let flow = net.max_flow(s, t) as usize;
    if flow == ws.len() {
        let mut stars: BTreeMap<usize, Vec<usize>> = us.iter().map(|&u| (u, Vec::new())).collect();
        for (a, u, w) in uw_arcs {
            if net.flow_on(a) > 0 {
                stars.get_mut(&u).expect("center in U").push(w);
            }
        }
        return Ok(StarFamily { stars });
    }
    let reach = net.residual_reach(s);
    let w_prime = VertexSet::from_iter(
        g.vertex_count(),
        ws.iter().enumerate().filter(|(j, _)| !reach[w_node(*j)]).map(|(_, &w)| w),
    );
    let mut nb = VertexSet::new(g.vertex_count());
    for w in w_prime.iter() {
        for &u in g.neighbors(w) {
            if u_set.contains(u) {
                nb.insert(u);
            }
        }
    }
    let neighbor_capacity = nb.iter().map(|u| f[&u]).sum();
    Err(EmbedError::Infeasible(Box::new(HallViolation { w_prime, neighbor_capacity, max_covered: flow })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, xs: impl IntoIterator<Item = usize>) -> VertexSet {
        VertexSet::from_iter(n, xs)
    }

    #[test]
    fn single_two_star() {
        let g = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let f = BTreeMap::from([(0, 2)]);
        let fam = f_matching(&g, &set(3, [0]), &set(3, [1, 2]), &f).unwrap();
        assert_eq!(fam.stars[&0], vec![1, 2]);
    }

    #[test]
    fn complete_bipartite_two_stars() {
        let g = Graph::from_edges(9, (0..3).flat_map(|i| (3..9).map(move |j| (i, j)))).unwrap();
        let f = BTreeMap::from([(0, 2), (1, 2), (2, 2)]);
        let (u, w) = (set(9, 0..3), set(9, 3..9));
        let fam = f_matching(&g, &u, &w, &f).unwrap();
        fam.verify(&g, &w, &f).unwrap();
    }

    #[test]
    fn infeasible_instance_has_hall_witness() {
        // Vertex 0 wants 1 leaf, but W = {2, 3} are both adjacent only to 0.
        let g = Graph::from_edges(4, [(0, 2), (0, 3), (1, 2)]).unwrap();
        let f = BTreeMap::from([(0, 1), (1, 1)]);
        let (u, w) = (set(4, [0, 1]), set(4, [2, 3]));
        let g2 = Graph::from_edges(4, [(0, 2), (0, 3)]).unwrap();
        assert!(f_matching(&g, &u, &w, &f).is_ok());
        match f_matching(&g2, &u, &w, &f) {
            Err(EmbedError::Infeasible(h)) => {
                assert!(h.verify(&g2, &u, &f));
                assert_eq!(h.max_covered, 1);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_demands() {
        let g = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let f = BTreeMap::from([(0, 1)]);
        assert!(matches!(f_matching(&g, &set(3, [0]), &set(3, [1, 2]), &f), Err(EmbedError::BadInput(_))));
    }
}
