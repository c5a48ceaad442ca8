//! Exhaustive backtracking over transversal cycles on tiny instances: an
//! independent oracle for factors and maximum tilings.

use std::collections::{HashMap, HashSet};

use super::{FactorError, TransversalCycle};
use crate::graph::{PartitionedGraph, VertexSet};

/// Largest `k`, and largest per-part domain for the maximum tiling search.
pub const EXACT_FACTOR_CAP: usize = 8;

/// Largest per-part domain for the factor search, which prunes much harder
/// than the maximum tiling search.
pub const EXACT_PART_CAP: usize = 16;

/// Search nodes before giving up.
const NODE_BUDGET: u64 = 5_000_000;

struct Local<'a> {
    pg: &'a PartitionedGraph,
    k: usize,
    verts: Vec<Vec<usize>>,
    /// `fwd[i][a]`: neighbors in part `i+1` of local vertex `a` of part `i`.
    fwd: Vec<Vec<u16>>,
    bwd: Vec<Vec<u16>>,
    nodes: u64,
    budget: u64,
}

type State = [u16; EXACT_FACTOR_CAP];

impl<'a> Local<'a> {
    fn new(pg: &'a PartitionedGraph, domain: &VertexSet, part_cap: usize) -> Result<Self, FactorError> {
        let k = pg.k();
        if k > EXACT_FACTOR_CAP {
            return Err(FactorError::TooLarge(format!("k = {k} exceeds {EXACT_FACTOR_CAP}")));
        }
        let verts: Vec<Vec<usize>> =
            (0..k).map(|i| pg.part(i).iter().copied().filter(|&v| domain.contains(v)).collect()).collect();
        if let Some(big) = verts.iter().find(|p| p.len() > part_cap) {
            return Err(FactorError::TooLarge(format!("{} vertices in one part exceed {part_cap}", big.len())));
        }
        let g = pg.graph();
        let mask = |v: usize, part: &[usize]| -> u16 {
            part.iter().enumerate().filter(|(_, &w)| g.has_edge(v, w)).fold(0u16, |m, (b, _)| m | 1 << b)
        };
        let fwd = (0..k).map(|i| verts[i].iter().map(|&v| mask(v, &verts[(i + 1) % k])).collect()).collect();
        let bwd = (0..k).map(|i| verts[i].iter().map(|&v| mask(v, &verts[(i + k - 1) % k])).collect()).collect();
        Ok(Local { pg, k, verts, fwd, bwd, nodes: 0, budget: NODE_BUDGET })
    }

    fn start_state(&self) -> State {
        let mut s = [0u16; EXACT_FACTOR_CAP];
        for (i, p) in self.verts.iter().enumerate() {
            s[i] = ((1u32 << p.len()) - 1) as u16;
        }
        s
    }

    /// All transversal cycles through local vertex `a` of part `p` inside `free`.
    fn cycles_through(&self, p: usize, a: usize, free: &State, out: &mut Vec<Vec<u8>>) {
        let k = self.k;
        let mut path = vec![a as u8];
        self.extend(p, a, free, &mut path, out);
        debug_assert!(out.iter().all(|c| c.len() == k));
    }

    fn extend(&self, p: usize, a: usize, free: &State, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        let k = self.k;
        let s = path.len();
        let part = (p + s - 1) % k;
        let last = *path.last().unwrap() as usize;
        let next = (part + 1) % k;
        let mut cands = self.fwd[part][last] & free[next];
        if s == k - 1 {
            cands &= self.bwd[p][a];
        }
        while cands != 0 {
            let b = cands.trailing_zeros() as u8;
            cands &= cands - 1;
            path.push(b);
            if s == k - 1 {
                out.push(path.clone());
            } else {
                self.extend(p, a, free, path, out);
            }
            path.pop();
        }
    }

    fn remove(&self, p: usize, cycle: &[u8], free: &State) -> State {
        let mut s = *free;
        for (t, &b) in cycle.iter().enumerate() {
            s[(p + t) % self.k] &= !(1u16 << b);
        }
        s
    }

    /// A free vertex with the fewest two-sided options, or `None` if empty.
    /// A vertex with no option at all comes back with score 0.
    fn pivot(&self, free: &State) -> Option<(usize, usize, u32)> {
        let k = self.k;
        let mut best: Option<(usize, usize, u32)> = None;
        for i in 0..k {
            let mut m = free[i];
            while m != 0 {
                let a = m.trailing_zeros() as usize;
                m &= m - 1;
                let score = (self.fwd[i][a] & free[(i + 1) % k]).count_ones()
                    * (self.bwd[i][a] & free[(i + k - 1) % k]).count_ones();
                if best.is_none_or(|b| score < b.2) {
                    best = Some((i, a, score));
                }
            }
        }
        best
    }

    fn to_cycle(&self, p: usize, cycle: &[u8]) -> TransversalCycle {
        let mut vertices = vec![0; self.k];
        for (t, &b) in cycle.iter().enumerate() {
            let part = (p + t) % self.k;
            vertices[part] = self.verts[part][b as usize];
        }
        TransversalCycle::new(self.pg, vertices).expect("search only follows host edges")
    }

    fn factor(&mut self, free: State, failed: &mut HashSet<State>, out: &mut Vec<TransversalCycle>) -> Result<bool, FactorError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(FactorError::TooLarge("exact factor search budget exhausted".into()));
        }
        let Some((p, a, score)) = self.pivot(&free) else { return Ok(true) };
        if score == 0 || failed.contains(&free) {
            return Ok(false);
        }
        let mut cycles = Vec::new();
        self.cycles_through(p, a, &free, &mut cycles);
        for c in cycles {
            let next = self.remove(p, &c, &free);
            if self.factor(next, failed, out)? {
                out.push(self.to_cycle(p, &c));
                return Ok(true);
            }
        }
        failed.insert(free);
        Ok(false)
    }

    fn max_tiling(&mut self, free: State, memo: &mut HashMap<State, u8>) -> u8 {
        if let Some(&v) = memo.get(&free) {
            return v;
        }
        self.nodes += 1;
        let bound = (0..self.k).map(|i| free[i].count_ones()).min().unwrap_or(0) as u8;
        if bound == 0 || self.nodes > self.budget {
            return 0;
        }
        let (p, a, _) = self.pivot(&free).expect("bound > 0");
        // Either some cycle through `a` is used, or `a` stays uncovered.
        let mut best = 0;
        let mut cycles = Vec::new();
        self.cycles_through(p, a, &free, &mut cycles);
        for c in cycles {
            best = best.max(1 + self.max_tiling(self.remove(p, &c, &free), memo));
            if best == bound {
                break;
            }
        }
        let mut skip = free;
        skip[p] &= !(1u16 << a);
        let skip_bound = (0..self.k).map(|i| skip[i].count_ones()).min().unwrap_or(0) as u8;
        if best < skip_bound {
            best = best.max(self.max_tiling(skip, memo));
        }
        memo.insert(free, best);
        best
    }

    fn rebuild(&mut self, mut free: State, memo: &mut HashMap<State, u8>, out: &mut Vec<TransversalCycle>) {
        loop {
            let target = self.max_tiling(free, memo);
            if target == 0 {
                return;
            }
            let (p, a, _) = self.pivot(&free).expect("nonempty");
            let mut skip = free;
            skip[p] &= !(1u16 << a);
            if self.max_tiling(skip, memo) == target {
                free = skip;
                continue;
            }
            let mut cycles = Vec::new();
            self.cycles_through(p, a, &free, &mut cycles);
            let Some(c) = cycles.into_iter().find(|c| 1 + self.max_tiling(self.remove(p, c, &free), memo) == target)
            else {
                return;
            };
            out.push(self.to_cycle(p, &c));
            free = self.remove(p, &c, &free);
        }
    }
}

/// A transversal `C_k`-factor of `pg[domain]`, or `None` after the search
/// space is exhausted. `domain` must be balanced with at most
/// [`EXACT_PART_CAP`] vertices per part.
pub fn exact_transversal_factor(
    pg: &PartitionedGraph,
    domain: &VertexSet,
) -> Result<Option<Vec<TransversalCycle>>, FactorError> {
    exact_factor_within(pg, domain, NODE_BUDGET)
}

/// [`exact_transversal_factor`] with a custom node budget.
pub(crate) fn exact_factor_within(
    pg: &PartitionedGraph,
    domain: &VertexSet,
    budget: u64,
) -> Result<Option<Vec<TransversalCycle>>, FactorError> {
    if !pg.is_balanced(domain) {
        return Err(FactorError::Unbalanced);
    }
    let mut local = Local::new(pg, domain, EXACT_PART_CAP)?;
    local.budget = budget;
    let mut out = Vec::new();
    let start = local.start_state();
    if local.factor(start, &mut HashSet::new(), &mut out)? {
        out.reverse();
        Ok(Some(out))
    } else {
        Ok(None)
    }
}

/// A maximum transversal `C_k`-tiling of `pg[domain]`. The flag is false
/// when the node budget ran out (the tiling is then only a lower bound).
pub fn exact_max_tiling(pg: &PartitionedGraph, domain: &VertexSet) -> Result<(Vec<TransversalCycle>, bool), FactorError> {
    let mut local = Local::new(pg, domain, EXACT_FACTOR_CAP)?;
    let mut memo = HashMap::new();
    let start = local.start_state();
    local.max_tiling(start, &mut memo);
    let complete = local.nodes <= local.budget;
    let mut out = Vec::new();
    local.rebuild(start, &mut memo, &mut out);
    Ok((out, complete))
}
