//! Bipartite holes: the bipartite independence number `α*`, the
//! bipartite-hole number `α̃`, and the blow-up variant `α*_b`.
//!
//! Exact modes enumerate one side `S` of the hole and read the other side off
//! the non-neighborhood: a `(s, t)`-hole with left side `S` exists iff
//! `|V \ (S ∪ N(S))| ≥ t`.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, PartitionedGraph, VertexSet};
use crate::rng::{derive_index, rng_from, Rng};

pub const EXACT_CAP: usize = 24;
pub const BLOWUP_EXACT_CAP: usize = 18;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HoleError {
    #[error("instance too large for exact mode: {size} vertices exceeds cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("search budget must be positive")]
    ZeroBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleMode {
    Exact,
    LowerBound,
}

/// Disjoint sets with no edges between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleWitness {
    pub s_side: VertexSet,
    pub t_side: VertexSet,
}

impl HoleWitness {
    pub fn verify(&self, g: &Graph) -> bool {
        self.s_side.is_disjoint(&self.t_side)
            && self.s_side.iter().all(|v| v < g.vertex_count() && g.degree_into(v, &self.t_side) == 0)
            && self.t_side.iter().all(|v| v < g.vertex_count())
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.s_side.len(), self.t_side.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleReport {
    pub value: usize,
    pub witness: Option<HoleWitness>,
    pub mode: HoleMode,
    pub search_budget: usize,
}

fn masks(g: &Graph) -> Vec<u32> {
    (0..g.vertex_count())
        .map(|v| g.neighbors(v).iter().fold(1u32 << v, |m, &w| m | 1 << w))
        .collect()
}

fn mask_to_set(n: usize, mask: u32, map: &[usize]) -> VertexSet {
    VertexSet::from_iter(n, (0..map.len()).filter(|i| mask >> i & 1 == 1).map(|i| map[i]))
}

fn first_bits(mask: u32, count: usize) -> u32 {
    let mut out = 0u32;
    let mut rest = mask;
    for _ in 0..count {
        let low = rest & rest.wrapping_neg();
        out |= low;
        rest &= !low;
    }
    out
}

/// Branch-and-bound over left sides `S` (as masks over `0..len`), maximizing
/// `min(|S|, |free(S) ∩ targets|)`. `closed[i]` is the closed neighborhood of
/// left candidate `i` expressed in target bits.
struct BalancedSearch<'a> {
    closed: &'a [u32],
    targets: u32,
    best: usize,
    best_s: u32,
    best_free: u32,
}

impl BalancedSearch<'_> {
    fn run(&mut self, start: usize, s: u32, size: usize, blocked: u32) {
        let free = self.targets & !blocked;
        let f = free.count_ones() as usize;
        let value = size.min(f);
        if value > self.best {
            self.best = value;
            self.best_s = s;
            self.best_free = free;
        }
        let remaining = self.closed.len() - start;
        if f <= self.best || size + remaining <= self.best {
            return;
        }
        for i in start..self.closed.len() {
            if size + (self.closed.len() - i) <= self.best {
                return;
            }
            self.run(i + 1, s | 1 << i, size + 1, blocked | self.closed[i]);
        }
    }
}

fn check_cap(size: usize, cap: usize) -> Result<(), HoleError> {
    if size > cap.min(32) {
        return Err(HoleError::TooLarge { size, cap });
    }
    Ok(())
}

pub fn alpha_star_exact(g: &Graph) -> Result<HoleReport, HoleError> {
    alpha_star_exact_capped(g, EXACT_CAP)
}

/// Exact `α*(G)`: the largest `t` admitting a `(t, t)`-hole.
pub fn alpha_star_exact_capped(g: &Graph, cap: usize) -> Result<HoleReport, HoleError> {
    let n = g.vertex_count();
    check_cap(n, cap)?;
    let closed = masks(g);
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut search = BalancedSearch { closed: &closed, targets: all, best: 0, best_s: 0, best_free: 0 };
    search.run(0, 0, 0, 0);
    let map: Vec<usize> = (0..n).collect();
    let t = search.best;
    let witness = (t > 0).then(|| HoleWitness {
        s_side: mask_to_set(n, first_bits(search.best_s, t), &map),
        t_side: mask_to_set(n, first_bits(search.best_free, t), &map),
    });
    Ok(HoleReport { value: t, witness, mode: HoleMode::Exact, search_budget: 0 })
}

pub fn bipartite_hole_number_exact(g: &Graph) -> Result<HoleReport, HoleError> {
    bipartite_hole_number_exact_capped(g, EXACT_CAP)
}

/// Exact `α̃(G)`: the largest `r` such that an `(s, r − s)`-hole exists for
/// every `0 ≤ s ≤ r`. A `(0, t)`-hole exists for every `t ≤ n`.
///
/// The attached witness is the most balanced hole of total size `r`.
pub fn bipartite_hole_number_exact_capped(g: &Graph, cap: usize) -> Result<HoleReport, HoleError> {
    let n = g.vertex_count();
    check_cap(n, cap)?;
    let closed = masks(g);
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // max_free[s] = max |V \ N[S]| over |S| = s, with an argmax.
    let mut max_free = vec![(0usize, 0u32, 0u32); n + 1];
    max_free[0] = (n, 0, all);
    fn sweep(
        closed: &[u32],
        all: u32,
        start: usize,
        s: u32,
        size: usize,
        blocked: u32,
        out: &mut [(usize, u32, u32)],
    ) {
        for i in start..closed.len() {
            let b = blocked | closed[i];
            let s2 = s | 1 << i;
            let free = all & !b;
            let f = free.count_ones() as usize;
            if out[size + 1].1 == 0 || f > out[size + 1].0 {
                out[size + 1] = (f, s2, free);
            }
            sweep(closed, all, i + 1, s2, size + 1, b, out);
        }
    }
    sweep(&closed, all, 0, 0, 0, 0, &mut max_free);
    let mut r = 0;
    for cand in 1..=n {
        if (0..=cand).all(|s| max_free[s].0 >= cand - s) {
            r = cand;
        } else {
            break;
        }
    }
    let map: Vec<usize> = (0..n).collect();
    let witness = (r > 0).then(|| {
        let s = r / 2;
        let (_, smask, free) = max_free[s];
        HoleWitness {
            s_side: mask_to_set(n, smask, &map),
            t_side: mask_to_set(n, first_bits(free, r - s), &map),
        }
    });
    Ok(HoleReport { value: r, witness, mode: HoleMode::Exact, search_budget: 0 })
}

/// Greedy peeling: grow `S` one vertex at a time, each time picking the
/// vertex that removes the fewest vertices from the current non-neighborhood
/// `F` (restricted to `targets`), and record the best `min(|S|, |F|)`.
fn greedy_hole(
    g: &Graph,
    sources: &[usize],
    targets: &VertexSet,
    first: usize,
    rng: &mut Rng,
) -> (usize, VertexSet, VertexSet) {
    let n = g.vertex_count();
    let mut s = VertexSet::new(n);
    let mut free = targets.clone();
    let mut best = (0usize, VertexSet::new(n), VertexSet::new(n));
    let mut order = sources.to_vec();
    order.shuffle(rng);
    let mut next = Some(first);
    while let Some(u) = next {
        s.insert(u);
        free.remove(u);
        for &w in g.neighbors(u) {
            free.remove(w);
        }
        let value = s.len().min(free.len());
        if value > best.0 {
            best = (value, s.clone(), free.clone());
        }
        if free.len() <= best.0 {
            break;
        }
        next = None;
        let mut best_loss = usize::MAX;
        for &v in &order {
            if s.contains(v) {
                continue;
            }
            let loss = g.degree_into(v, &free) + usize::from(free.contains(v));
            if loss < best_loss {
                best_loss = loss;
                next = Some(v);
                if loss == 0 {
                    break;
                }
            }
        }
    }
    let (t, s_best, free_best) = best;
    let s_side = VertexSet::from_iter(n, s_best.iter().take(t));
    let t_side = VertexSet::from_iter(n, free_best.iter().take(t));
    (t, s_side, t_side)
}

/// Heuristic `(t, t)`-hole search; never overstates since a witness is always
/// attached. `budget` is the number of greedy restarts.
pub fn alpha_star_lower_bound(g: &Graph, budget: usize, seed: u64) -> Result<HoleReport, HoleError> {
    if budget == 0 {
        return Err(HoleError::ZeroBudget);
    }
    let n = g.vertex_count();
    let all: Vec<usize> = (0..n).collect();
    let targets = VertexSet::full(n);
    let mut best: Option<(usize, HoleWitness)> = None;
    for round in 0..budget {
        if n == 0 {
            break;
        }
        let mut rng = rng_from(derive_index(seed, round as u64));
        // Low-degree starts are the most promising; later rounds go random.
        let first = if round == 0 {
            (0..n).min_by_key(|&v| g.degree(v)).unwrap_or(0)
        } else {
            rng.gen_range(0..n)
        };
        let (t, s_side, t_side) = greedy_hole(g, &all, &targets, first, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| t > *b) {
            best = Some((t, HoleWitness { s_side, t_side }));
        }
    }
    Ok(match best {
        Some((t, w)) if t > 0 => HoleReport {
            value: t,
            witness: Some(w),
            mode: HoleMode::LowerBound,
            search_budget: budget,
        },
        _ => HoleReport { value: 0, witness: None, mode: HoleMode::LowerBound, search_budget: budget },
    })
}

/// `α*_b`: the largest `t` with `S ⊆ V_i`, `T ⊆ V_{i+1}`, `|S| = |T| = t`
/// and no edges between, over all consecutive pairs.
pub fn alpha_star_b(pg: &PartitionedGraph, mode: HoleMode, budget: usize, seed: u64) -> Result<HoleReport, HoleError> {
    match mode {
        HoleMode::Exact => alpha_star_b_exact(pg, BLOWUP_EXACT_CAP),
        HoleMode::LowerBound => alpha_star_b_lower_bound(pg, budget, seed),
    }
}

pub fn alpha_star_b_exact(pg: &PartitionedGraph, cap: usize) -> Result<HoleReport, HoleError> {
    check_cap(pg.part_size(), cap)?;
    let g = pg.graph();
    let n = pg.vertex_count();
    let m = pg.part_size();
    let mut best: (usize, Option<HoleWitness>) = (0, None);
    for i in 0..pg.k() {
        let left = pg.part(i);
        let right = pg.part(pg.next(i));
        let closed: Vec<u32> = left
            .iter()
            .map(|&u| {
                right.iter().enumerate().filter(|(_, &w)| g.has_edge(u, w)).fold(0u32, |m, (j, _)| m | 1 << j)
            })
            .collect();
        let all = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        let mut search = BalancedSearch { closed: &closed, targets: all, best: best.0, best_s: 0, best_free: 0 };
        search.run(0, 0, 0, 0);
        if search.best > best.0 {
            let t = search.best;
            best = (
                t,
                Some(HoleWitness {
                    s_side: mask_to_set(n, first_bits(search.best_s, t), left),
                    t_side: mask_to_set(n, first_bits(search.best_free, t), right),
                }),
            );
        }
    }
    Ok(HoleReport { value: best.0, witness: best.1, mode: HoleMode::Exact, search_budget: 0 })
}

pub fn alpha_star_b_lower_bound(pg: &PartitionedGraph, budget: usize, seed: u64) -> Result<HoleReport, HoleError> {
    if budget == 0 {
        return Err(HoleError::ZeroBudget);
    }
    let g = pg.graph();
    let mut best: (usize, Option<HoleWitness>) = (0, None);
    for i in 0..pg.k() {
        for (a, b) in [(i, pg.next(i)), (pg.next(i), i)] {
            let sources = pg.part(a);
            let targets = pg.part_set(b);
            for round in 0..budget {
                let mut rng = rng_from(derive_index(seed, (i * 2 * budget + round) as u64));
                let first = if round == 0 {
                    *sources.iter().min_by_key(|&&v| g.degree_into(v, &targets)).expect("parts are nonempty")
                } else {
                    sources[rng.gen_range(0..sources.len())]
                };
                let (t, s_side, t_side) = greedy_hole(g, sources, &targets, first, &mut rng);
                if t > best.0 {
                    best = (t, Some(HoleWitness { s_side, t_side }));
                }
            }
        }
    }
    Ok(HoleReport { value: best.0, witness: best.1, mode: HoleMode::LowerBound, search_budget: budget })
}
