//! Hopcroft–Karp maximum bipartite matching with a König vertex cover.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::EmbedError;
use crate::graph::{Graph, VertexSet};

/// A bipartite graph on local indices `0..left` and `0..right`.
#[derive(Clone, Debug, Default)]
pub struct Bipartite {
    pub left: usize,
    pub right: usize,
    pub adj: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMatching {
    pub left_match: Vec<Option<usize>>,
    pub right_match: Vec<Option<usize>>,
    pub size: usize,
}

impl LocalMatching {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left_match.iter().enumerate().filter_map(|(l, r)| r.map(|r| (l, r)))
    }
}

impl Bipartite {
    pub fn new(left: usize, right: usize) -> Self {
        Bipartite { left, right, adj: vec![Vec::new(); left] }
    }

    pub fn add_edge(&mut self, l: usize, r: usize) {
        self.adj[l].push(r);
    }

    pub fn max_matching(&self) -> LocalMatching {
        self.extend_matching(vec![None; self.left])
    }

    /// Hopcroft–Karp started from a given (valid) partial matching.
    pub fn extend_matching(&self, initial: Vec<Option<usize>>) -> LocalMatching {
        const FREE: usize = usize::MAX;
        let mut lm = initial;
        let mut rm = vec![None; self.right];
        for (l, r) in lm.iter().enumerate() {
            if let Some(r) = *r {
                rm[r] = Some(l);
            }
        }
        let mut dist = vec![FREE; self.left];
        loop {
            // Layered BFS from free left vertices.
            let mut queue = VecDeque::new();
            for l in 0..self.left {
                if lm[l].is_none() {
                    dist[l] = 0;
                    queue.push_back(l);
                } else {
                    dist[l] = FREE;
                }
            }
            let mut found = false;
            while let Some(l) = queue.pop_front() {
                for &r in &self.adj[l] {
                    match rm[r] {
                        None => found = true,
                        Some(l2) if dist[l2] == FREE => {
                            dist[l2] = dist[l] + 1;
                            queue.push_back(l2);
                        }
                        _ => {}
                    }
                }
            }
            if !found {
                break;
            }
            let mut it = vec![0usize; self.left];
            for l in 0..self.left {
                if lm[l].is_none() {
                    self.augment(l, &mut lm, &mut rm, &mut dist, &mut it);
                }
            }
        }
        let size = lm.iter().filter(|m| m.is_some()).count();
        LocalMatching { left_match: lm, right_match: rm, size }
    }

    fn augment(
        &self,
        start: usize,
        lm: &mut [Option<usize>],
        rm: &mut [Option<usize>],
        dist: &mut [usize],
        it: &mut [usize],
    ) -> bool {
        // Iterative DFS along the BFS layers.
        let mut stack = vec![start];
        while let Some(&l) = stack.last() {
            if it[l] == self.adj[l].len() {
                dist[l] = usize::MAX;
                stack.pop();
                continue;
            }
            let r = self.adj[l][it[l]];
            match rm[r] {
                None => {
                    // Flip the alternating path recorded on the stack.
                    let mut r = r;
                    while let Some(l) = stack.pop() {
                        let prev = lm[l];
                        lm[l] = Some(r);
                        rm[r] = Some(l);
                        match prev {
                            Some(p) => r = p,
                            None => break,
                        }
                    }
                    return true;
                }
                Some(l2) if dist[l2] == dist[l] + 1 => {
                    it[l] += 1;
                    stack.push(l2);
                }
                _ => it[l] += 1,
            }
        }
        false
    }

    /// König: from a maximum matching, the cover `(L \ Z) ∪ (R ∩ Z)` where `Z`
    /// is everything reachable from free left vertices by alternating paths.
    pub fn konig_cover(&self, m: &LocalMatching) -> (Vec<bool>, Vec<bool>) {
        let mut zl = vec![false; self.left];
        let mut zr = vec![false; self.right];
        let mut queue: VecDeque<usize> = (0..self.left).filter(|&l| m.left_match[l].is_none()).collect();
        for &l in &queue {
            zl[l] = true;
        }
        while let Some(l) = queue.pop_front() {
            for &r in &self.adj[l] {
                if m.left_match[l] == Some(r) || zr[r] {
                    continue;
                }
                zr[r] = true;
                if let Some(l2) = m.right_match[r] {
                    if !zl[l2] {
                        zl[l2] = true;
                        queue.push_back(l2);
                    }
                }
            }
        }
        (zl.iter().map(|z| !z).collect(), zr)
    }
}

/// A maximum matching between two disjoint host vertex sets, with a minimum
/// vertex cover of the same size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteMatching {
    pub pairs: Vec<(usize, usize)>,
    pub cover: VertexSet,
}

pub fn max_bipartite_matching(g: &Graph, a: &VertexSet, b: &VertexSet) -> Result<BipartiteMatching, EmbedError> {
    if let Some(v) = a.iter().find(|&v| b.contains(v)) {
        return Err(EmbedError::Overlap(v));
    }
    let left: Vec<usize> = a.iter().collect();
    let right: Vec<usize> = b.iter().collect();
    let mut right_index = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in right.iter().enumerate() {
        right_index[v] = i;
    }
    let mut bg = Bipartite::new(left.len(), right.len());
    for (i, &u) in left.iter().enumerate() {
        for &w in g.neighbors(u) {
            if right_index[w] != usize::MAX {
                bg.add_edge(i, right_index[w]);
            }
        }
    }
    let m = bg.max_matching();
    let (cl, cr) = bg.konig_cover(&m);
    let mut cover = VertexSet::new(g.vertex_count());
    for (i, &c) in cl.iter().enumerate() {
        if c {
            cover.insert(left[i]);
        }
    }
    for (i, &c) in cr.iter().enumerate() {
        if c {
            cover.insert(right[i]);
        }
    }
    let pairs: Vec<(usize, usize)> = m.pairs().map(|(l, r)| (left[l], right[r])).collect();
    if pairs.len() != cover.len() {
        return Err(EmbedError::Internal(format!(
            "König equality failed: matching {} vs cover {}",
            pairs.len(),
            cover.len()
        )));
    }
    Ok(BipartiteMatching { pairs, cover })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use proptest::prelude::*;
    use rand::Rng as _;

    /// Independent oracle: Kuhn's simple augmenting-path algorithm.
    fn kuhn(bg: &Bipartite) -> usize {
        fn try_kuhn(l: usize, bg: &Bipartite, seen: &mut [bool], rm: &mut [Option<usize>]) -> bool {
            for &r in &bg.adj[l] {
                if !seen[r] {
                    seen[r] = true;
                    if rm[r].is_none_or(|l2| try_kuhn(l2, bg, seen, rm)) {
                        rm[r] = Some(l);
                        return true;
                    }
                }
            }
            false
        }
        let mut rm = vec![None; bg.right];
        (0..bg.left).filter(|&l| try_kuhn(l, bg, &mut vec![false; bg.right], &mut rm)).count()
    }

    fn set(n: usize, xs: impl IntoIterator<Item = usize>) -> VertexSet {
        VertexSet::from_iter(n, xs)
    }

    #[test]
    fn matching_examples() {
        let k33 = Graph::from_edges(6, (0..3).flat_map(|i| (3..6).map(move |j| (i, j)))).unwrap();
        let m = max_bipartite_matching(&k33, &set(6, 0..3), &set(6, 3..6)).unwrap();
        assert_eq!(m.pairs.len(), 3);
        let star = Graph::from_edges(5, (1..5).map(|i| (0, i))).unwrap();
        let m = max_bipartite_matching(&star, &set(5, [0]), &set(5, 1..5)).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.cover.to_vec(), vec![0]);
        assert!(matches!(
            max_bipartite_matching(&star, &set(5, [0, 1]), &set(5, 1..5)),
            Err(EmbedError::Overlap(1))
        ));
    }

    proptest! {
        #[test]
        fn hopcroft_karp_matches_kuhn(l in 1usize..60, r in 1usize..60, p in 0.0f64..0.3, seed in any::<u64>()) {
            let mut rng = rng_from(seed);
            let mut bg = Bipartite::new(l, r);
            for i in 0..l {
                for j in 0..r {
                    if rng.gen_bool(p) {
                        bg.add_edge(i, j);
                    }
                }
            }
            let m = bg.max_matching();
            prop_assert_eq!(m.size, kuhn(&bg));
            for (a, b) in m.pairs() {
                prop_assert!(bg.adj[a].contains(&b));
                prop_assert_eq!(m.right_match[b], Some(a));
            }
            let (cl, cr) = bg.konig_cover(&m);
            prop_assert_eq!(cl.iter().chain(&cr).filter(|c| **c).count(), m.size);
            for i in 0..l {
                for &j in &bg.adj[i] {
                    prop_assert!(cl[i] || cr[j], "edge {}-{} uncovered", i, j);
                }
            }
        }
    }
}
