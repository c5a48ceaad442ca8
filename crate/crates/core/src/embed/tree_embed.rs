//! Greedy tree and forest embedding with bounded rollback.
//!
//! Vertices are placed in BFS order. A candidate image must keep every
//! placed vertex able to host its unplaced children (`free ≥ pending`);
//! among valid candidates the one with the most free neighbors wins, with a
//! penalty for eating into the room of other frontier vertices.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{expander_threshold, EmbedError, Embedding};
use crate::graph::{Graph, VertexSet};
use crate::rng::{derive_index, rng_from, Rng};
use crate::tree::Tree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEmbedConfig {
    /// Placements allowed per attempt, as a multiple of the pattern size.
    pub budget_factor: usize,
    /// Extra attempts with a fresh random order after the first one.
    pub restarts: usize,
    pub seed: u64,
    /// Reject trees larger than `n − 4Δ⌈n/2d⌉` instead of trying anyway.
    pub strict_room: bool,
}

impl Default for TreeEmbedConfig {
    fn default() -> Self {
        TreeEmbedConfig { budget_factor: 50, restarts: 3, seed: 0, strict_room: false }
    }
}

/// Which size precondition of the expander embedding fails, if any.
pub fn tree_room_check(n: usize, t: &Tree, d: f64) -> Result<(), String> {
    let delta = t.max_degree();
    if d < 2.0 * delta as f64 {
        return Err(format!("d = {d} is below 2Δ(T) = {}", 2 * delta));
    }
    let room = n as i64 - (4 * delta * expander_threshold(n, d)) as i64;
    if t.vertex_count() as i64 > room {
        return Err(format!("|T| = {} exceeds n - 4Δ⌈n/2d⌉ = {room}", t.vertex_count()));
    }
    Ok(())
}

/// Embeds `t` into `g`. `d ≥ 2Δ(T)` is required; the room condition
/// `|T| ≤ n − 4Δ⌈n/2d⌉` only when `cfg.strict_room` is set. Expansion of
/// `g` itself is the caller's business.
pub fn embed_tree_in_expander(g: &Graph, t: &Tree, d: f64, cfg: &TreeEmbedConfig) -> Result<Embedding, EmbedError> {
    if let Err(msg) = tree_room_check(g.vertex_count(), t, d) {
        if cfg.strict_room || d < 2.0 * t.max_degree() as f64 {
            return Err(EmbedError::BadInput(msg));
        }
    }
    embed_forest(g, &g.all_vertices(), t.graph(), &[], cfg)
}

/// Embeds the forest `pattern` into `host[allowed]`, with the pattern
/// vertices in `fixed` pinned to the given host vertices.
pub fn embed_forest(
    host: &Graph,
    allowed: &VertexSet,
    pattern: &Graph,
    fixed: &[(usize, usize)],
    cfg: &TreeEmbedConfig,
) -> Result<Embedding, EmbedError> {
    let np = pattern.vertex_count();
    let nh = host.vertex_count();
    if pattern.edge_count() + forest_components(pattern) != np {
        return Err(EmbedError::BadInput("pattern is not a forest".into()));
    }
    let mut pin = vec![None; np];
    let mut reserved = vec![false; nh];
    for &(v, h) in fixed {
        if v >= np || h >= nh || !allowed.contains(h) {
            return Err(EmbedError::BadInput(format!("bad pin {v} -> {h}")));
        }
        if pin[v].is_some() || reserved[h] {
            return Err(EmbedError::BadInput(format!("pin {v} -> {h} clashes with another pin")));
        }
        pin[v] = Some(h);
        reserved[h] = true;
    }
    if allowed.len() < np {
        return Err(EmbedError::BadInput(format!("{np} pattern vertices but only {} host vertices", allowed.len())));
    }
    let mut best = 0;
    for attempt in 0..=cfg.restarts {
        let mut rng = rng_from(derive_index(cfg.seed, attempt as u64));
        let mut search = Search::new(host, allowed, pattern, &pin, &reserved, &mut rng);
        match search.run(cfg.budget_factor.max(1) * np.max(1), &mut rng) {
            Ok(()) => return Ok(Embedding { map: search.map, host_size: nh }),
            Err(placed) => best = best.max(placed),
        }
    }
    Err(EmbedError::SearchExhausted { placed: best, total: np })
}

fn forest_components(g: &Graph) -> usize {
    let mut seen = vec![false; g.vertex_count()];
    let mut count = 0;
    for r in 0..g.vertex_count() {
        if seen[r] {
            continue;
        }
        count += 1;
        let mut stack = vec![r];
        seen[r] = true;
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if !std::mem::replace(&mut seen[w], true) {
                    stack.push(w);
                }
            }
        }
    }
    count
}

struct Search<'a> {
    host: &'a Graph,
    allowed: &'a VertexSet,
    pin: &'a [Option<usize>],
    reserved: &'a [bool],
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<usize>,
    pending: Vec<usize>,
    /// Allowed, unused, unreserved host neighbors.
    free: Vec<usize>,
    used: Vec<Option<usize>>,
    map: Vec<Option<usize>>,
}

impl<'a> Search<'a> {
    fn new(
        host: &'a Graph,
        allowed: &'a VertexSet,
        pattern: &Graph,
        pin: &'a [Option<usize>],
        reserved: &'a [bool],
        rng: &mut Rng,
    ) -> Self {
        let np = pattern.vertex_count();
        // Roots: pinned vertices first, then the rest in random order.
        let mut roots: Vec<usize> = (0..np).filter(|&v| pin[v].is_some()).collect();
        let mut rest: Vec<usize> = (0..np).filter(|&v| pin[v].is_none()).collect();
        rest.shuffle(rng);
        rest.sort_by_key(|&v| std::cmp::Reverse(pattern.degree(v)));
        roots.extend(rest);
        let mut seen = vec![false; np];
        let mut order = Vec::with_capacity(np);
        let mut parent = vec![None; np];
        for r in roots {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            let start = order.len();
            order.push(r);
            let mut head = start;
            while head < order.len() {
                let v = order[head];
                head += 1;
                let mut kids: Vec<usize> = pattern.neighbors(v).iter().copied().filter(|&w| !seen[w]).collect();
                kids.shuffle(rng);
                for w in kids {
                    seen[w] = true;
                    parent[w] = Some(v);
                    order.push(w);
                }
            }
        }
        // Pinned children bring their own image, so only unpinned ones need room.
        let mut children = vec![0; np];
        for v in 0..np {
            if let (Some(p), None) = (parent[v], pin[v]) {
                children[p] += 1;
            }
        }
        let usable = |h: usize| allowed.contains(h) && !reserved[h];
        let free = (0..host.vertex_count())
            .map(|h| host.neighbors(h).iter().filter(|&&w| usable(w)).count())
            .collect();
        Search {
            host,
            allowed,
            pin,
            reserved,
            order,
            parent,
            pending: children.clone(),
            children,
            free,
            used: vec![None; host.vertex_count()],
            map: vec![None; np],
        }
    }

    fn usable(&self, h: usize) -> bool {
        self.allowed.contains(h) && !self.reserved[h] && self.used[h].is_none()
    }

    /// Score of placing `v` at `c`, or `None` if that breaks the room
    /// invariant.
    fn score(&self, v: usize, c: usize) -> Option<i64> {
        if self.free[c] < self.children[v] {
            return None;
        }
        let mut steal = 0i64;
        for &h in self.host.neighbors(c) {
            if let Some(u) = self.used[h] {
                if Some(u) != self.parent[v] && self.pending[u] > 0 {
                    if self.free[h] <= self.pending[u] {
                        return None;
                    }
                    steal += 1;
                }
            }
        }
        Some(self.free[c] as i64 - 4 * steal)
    }

    fn choose(&self, pos: usize, tried: &[usize], rng: &mut Rng) -> Option<usize> {
        let v = self.order[pos];
        let candidates: Vec<usize> = match (self.pin[v], self.parent[v]) {
            (Some(h), p) => {
                let ok = self.used[h].is_none() && p.is_none_or(|p| self.host.has_edge(self.map[p].unwrap(), h));
                if ok { vec![h] } else { Vec::new() }
            }
            (None, Some(p)) => {
                self.host.neighbors(self.map[p].unwrap()).iter().copied().filter(|&c| self.usable(c)).collect()
            }
            (None, None) => self.allowed.iter().filter(|&c| self.usable(c)).collect(),
        };
        let mut best: Option<(i64, u32, usize)> = None;
        for c in candidates {
            if tried.contains(&c) {
                continue;
            }
            let Some(s) = self.score(v, c) else { continue };
            let key = (s, rng.gen::<u32>(), c);
            if best.is_none_or(|b| (key.0, key.1) > (b.0, b.1)) {
                best = Some(key);
            }
        }
        best.map(|b| b.2)
    }

    fn place(&mut self, pos: usize, c: usize) {
        let v = self.order[pos];
        self.map[v] = Some(c);
        self.used[c] = Some(v);
        if self.pin[v].is_none() {
            if let Some(p) = self.parent[v] {
                self.pending[p] -= 1;
            }
            for &h in self.host.neighbors(c) {
                self.free[h] -= 1;
            }
        }
    }

    fn unplace(&mut self, pos: usize) -> usize {
        let v = self.order[pos];
        let c = self.map[v].take().expect("placed");
        self.used[c] = None;
        if self.pin[v].is_none() {
            if let Some(p) = self.parent[v] {
                self.pending[p] += 1;
            }
            for &h in self.host.neighbors(c) {
                self.free[h] += 1;
            }
        }
        c
    }

    /// Returns the deepest position reached on failure.
    fn run(&mut self, budget: usize, rng: &mut Rng) -> Result<(), usize> {
        let len = self.order.len();
        let mut tried: Vec<Vec<usize>> = vec![Vec::new(); len];
        let (mut pos, mut step, mut placements, mut best, mut last_fail) = (0, 1usize, 0, 0, 0);
        while pos < len {
            if placements >= budget {
                return Err(best);
            }
            match self.choose(pos, &tried[pos], rng) {
                Some(c) => {
                    self.place(pos, c);
                    placements += 1;
                    pos += 1;
                    best = best.max(pos);
                    if pos > last_fail {
                        step = 1;
                    }
                    if pos < len {
                        tried[pos].clear();
                    }
                }
                None => {
                    if pos == 0 {
                        return Err(best);
                    }
                    last_fail = last_fail.max(pos);
                    let back = step.min(pos);
                    for q in (pos - back..pos).rev() {
                        let c = self.unplace(q);
                        if q == pos - back {
                            tried[q].push(c);
                        }
                    }
                    pos -= back;
                    step *= 2;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn gnp(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = rng_from(seed);
        let edges: Vec<_> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect();
        Graph::from_edges(n, edges).unwrap()
    }

    fn random_tree(n: usize, max_deg: usize, seed: u64) -> Tree {
        let mut rng = rng_from(seed);
        let mut deg = vec![0; n];
        let mut edges = Vec::new();
        for v in 1..n {
            loop {
                let p = rng.gen_range(0..v);
                if deg[p] < max_deg - usize::from(p != 0) {
                    deg[p] += 1;
                    deg[v] += 1;
                    edges.push((p, v));
                    break;
                }
            }
        }
        Tree::from_edges(n, edges).unwrap()
    }

    fn path(n: usize) -> Tree {
        Tree::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn single_edge() {
        let t = Tree::from_edges(2, [(0, 1)]).unwrap();
        let g = Graph::from_edges(5, [(3, 4)]).unwrap();
        let e = embed_forest(&g, &g.all_vertices(), t.graph(), &[], &TreeEmbedConfig::default()).unwrap();
        e.verify(t.graph(), &g).unwrap();
    }

    #[test]
    fn path_into_complete_graph() {
        let t = path(50);
        let g = Graph::complete(60);
        let e = embed_tree_in_expander(&g, &t, 10.0, &TreeEmbedConfig::default()).unwrap();
        assert!(e.is_complete());
        e.verify(t.graph(), &g).unwrap();
    }

    #[test]
    fn random_tree_into_random_graph() {
        let t = random_tree(400, 4, 7);
        let g = gnp(500, 0.15, 11);
        let e = embed_tree_in_expander(&g, &t, 8.0, &TreeEmbedConfig { seed: 1, ..TreeEmbedConfig::default() }).unwrap();
        assert!(e.is_complete());
        e.verify(t.graph(), &g).unwrap();
    }

    #[test]
    fn precondition_failures_name_the_inequality() {
        let t = random_tree(100, 4, 1);
        let g = Graph::complete(110);
        let err = embed_tree_in_expander(&g, &t, 4.0, &TreeEmbedConfig::default()).unwrap_err();
        assert!(err.to_string().contains("2Δ"), "{err}");
        let strict = TreeEmbedConfig { strict_room: true, ..TreeEmbedConfig::default() };
        let err = embed_tree_in_expander(&g, &t, 8.0, &strict).unwrap_err();
        assert!(err.to_string().contains("n - 4Δ"), "{err}");
        assert!(embed_tree_in_expander(&g, &t, 8.0, &TreeEmbedConfig::default()).is_ok());
    }

    #[test]
    fn pinned_forest_respects_pins() {
        let forest = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (3, 5)]).unwrap();
        let g = gnp(40, 0.5, 3);
        let pins = [(0, 7), (3, 20)];
        let e = embed_forest(&g, &g.all_vertices(), &forest, &pins, &TreeEmbedConfig::default()).unwrap();
        e.verify(&forest, &g).unwrap();
        assert_eq!(e.map[0], Some(7));
        assert_eq!(e.map[3], Some(20));
    }

    #[test]
    fn restricted_host_set() {
        let t = path(10);
        let g = Graph::complete(30);
        let allowed = VertexSet::from_iter(30, 10..20);
        let e = embed_forest(&g, &allowed, t.graph(), &[], &TreeEmbedConfig::default()).unwrap();
        assert!(e.map.iter().flatten().all(|&h| (10..20).contains(&h)));
    }

    #[test]
    fn impossible_instance_reports_partial_progress() {
        // A star with 5 leaves cannot go into a path host.
        let star = Tree::from_edges(6, (1..6).map(|i| (0, i))).unwrap();
        let host = Graph::from_edges(10, (1..10).map(|i| (i - 1, i))).unwrap();
        let cfg = TreeEmbedConfig { restarts: 1, ..TreeEmbedConfig::default() };
        match embed_forest(&host, &host.all_vertices(), star.graph(), &[], &cfg) {
            Err(EmbedError::SearchExhausted { placed, total }) => assert!(placed < total),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}
