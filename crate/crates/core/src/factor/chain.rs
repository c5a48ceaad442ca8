//! Tiling by chained bipartite matchings: start one path at every vertex of
//! a part, extend all paths through the next part with a maximum matching,
//! and close them with a final matching that also checks the wrap-around
//! edge. Unmatched paths are dropped; their vertices are retried in later
//! rounds on the leftover. What the passes cannot place is handed to a
//! local repair that re-tiles a few leftover vertices together with nearby
//! cycles exactly.

use std::cmp::Reverse;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::exact::exact_max_tiling;
use super::{TransversalCycle, EXACT_FACTOR_CAP};
use crate::embed::Bipartite;
use crate::graph::{PartitionedGraph, VertexSet};
use crate::rng::Rng;

/// One chained pass over `domain`, starting at a random part.
fn chain_pass(pg: &PartitionedGraph, domain: &VertexSet, rng: &mut Rng) -> Vec<TransversalCycle> {
    let k = pg.k();
    let g = pg.graph();
    let start = rng.gen_range(0..k);
    let mut paths: Vec<Vec<usize>> = pg.part(start).iter().filter(|&&v| domain.contains(v)).map(|&v| vec![v]).collect();
    paths.shuffle(rng);
    for t in 1..k {
        let part = (start + t) % k;
        let mut right: Vec<usize> = pg.part(part).iter().copied().filter(|&v| domain.contains(v)).collect();
        right.shuffle(rng);
        let mut bg = Bipartite::new(paths.len(), right.len());
        for (l, path) in paths.iter().enumerate() {
            let end = *path.last().expect("nonempty path");
            for (r, &w) in right.iter().enumerate() {
                if g.has_edge(end, w) && (t < k - 1 || g.has_edge(w, path[0])) {
                    bg.add_edge(l, r);
                }
            }
        }
        let m = bg.max_matching();
        paths = m
            .pairs()
            .map(|(l, r)| {
                let mut p = std::mem::take(&mut paths[l]);
                p.push(right[r]);
                p
            })
            .collect::<Vec<_>>();
        if paths.is_empty() {
            return Vec::new();
        }
    }
    paths
        .into_iter()
        .map(|p| {
            let mut vertices = vec![0; k];
            for (t, v) in p.into_iter().enumerate() {
                vertices[(start + t) % k] = v;
            }
            TransversalCycle::new(pg, vertices).expect("matching edges are host edges")
        })
        .collect()
}

/// Re-tiles `take` random leftover vertices per part together with up to
/// `8 − take` cycles that see them, exactly, and keeps any result that
/// covers at least as much. Equal-size swaps let the search move on
/// plateaus. Needs `k ≤ 8`.
fn repair(pg: &PartitionedGraph, cycles: &mut Vec<TransversalCycle>, left: &mut VertexSet, rounds: usize, rng: &mut Rng) {
    let k = pg.k();
    let g = pg.graph();
    if k > EXACT_FACTOR_CAP {
        return;
    }
    for _ in 0..rounds {
        let per_part = left.len() / k;
        if per_part == 0 || cycles.is_empty() {
            break;
        }
        let take = per_part.min(2);
        let q = (EXACT_FACTOR_CAP - take).min(cycles.len());
        let mut domain = VertexSet::new(pg.vertex_count());
        let mut sample = Vec::with_capacity(take * k);
        for i in 0..k {
            let mut here: Vec<usize> = pg.part(i).iter().copied().filter(|&v| left.contains(v)).collect();
            here.shuffle(rng);
            sample.extend_from_slice(&here[..take]);
        }
        for &v in &sample {
            domain.insert(v);
        }
        let mut order: Vec<usize> = (0..cycles.len()).collect();
        order.shuffle(rng);
        order.sort_by_cached_key(|&c| Reverse(cycles[c].vertices.iter().filter(|&&w| sample.iter().any(|&s| g.has_edge(s, w))).count()));
        let mut chosen = order[..q].to_vec();
        for &c in &chosen {
            for &v in &cycles[c].vertices {
                domain.insert(v);
            }
        }
        let Ok((tiles, _)) = exact_max_tiling(pg, &domain) else { continue };
        if tiles.len() < q {
            continue;
        }
        chosen.sort_unstable_by(|a, b| b.cmp(a));
        for c in chosen {
            cycles.swap_remove(c);
        }
        for v in domain.iter() {
            left.insert(v);
        }
        for t in &tiles {
            for &v in &t.vertices {
                left.remove(v);
            }
        }
        cycles.extend(tiles);
    }
}

/// A transversal tiling of `pg[domain]` found by repeated chained matchings:
/// each attempt runs passes on the leftover until they stop helping, and
/// finishes with the exact solver once the leftover is small, then with the
/// local repair. Returns the
/// best tiling over `attempts` tries, stopping early at a perfect one.
pub fn matching_chain(pg: &PartitionedGraph, domain: &VertexSet, attempts: usize, rng: &mut Rng) -> Vec<TransversalCycle> {
    let k = pg.k();
    let per_part = pg.part(0).iter().filter(|&&v| domain.contains(v)).count();
    let mut best: Vec<TransversalCycle> = Vec::new();
    for _ in 0..attempts.max(1) {
        let mut cycles = Vec::new();
        let mut left = domain.clone();
        loop {
            let got = chain_pass(pg, &left, rng);
            if got.is_empty() {
                break;
            }
            for c in &got {
                for &v in &c.vertices {
                    left.remove(v);
                }
            }
            cycles.extend(got);
        }
        let rest = left.len() / k;
        if rest > 0 && rest <= EXACT_FACTOR_CAP && k <= EXACT_FACTOR_CAP && pg.is_balanced(&left) {
            if let Ok((extra, _)) = exact_max_tiling(pg, &left) {
                for c in &extra {
                    for &v in &c.vertices {
                        left.remove(v);
                    }
                }
                cycles.extend(extra);
            }
        }
        if cycles.len() < per_part {
            let short = per_part - cycles.len();
            repair(pg, &mut cycles, &mut left, 200 + 50 * short, rng);
        }
        if cycles.len() > best.len() {
            best = cycles;
        }
        if best.len() == per_part {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::testutil::random_blowup;
    use crate::factor::{check_disjoint, verify_factor};
    use crate::rng::rng_from;

    #[test]
    fn complete_blowup_gets_perfect_tiling() {
        let pg = PartitionedGraph::complete_blowup(6, 10).unwrap();
        let all = pg.graph().all_vertices();
        let t = matching_chain(&pg, &all, 1, &mut rng_from(0));
        verify_factor(&pg, &t, &all).unwrap();
    }

    #[test]
    fn dense_random_instances_get_factors() {
        for seed in 0..10 {
            let pg = random_blowup(4, 40, 0.5, seed);
            let all = pg.graph().all_vertices();
            let t = matching_chain(&pg, &all, 5, &mut rng_from(seed));
            verify_factor(&pg, &t, &all).unwrap();
        }
    }

    #[test]
    fn repair_completes_sparse_instances() {
        // Density 0.3 at part size 30: chained passes alone usually leave
        // a few cycles out.
        for seed in 0..5 {
            let pg = random_blowup(4, 30, 0.3, seed);
            let all = pg.graph().all_vertices();
            let t = matching_chain(&pg, &all, 3, &mut rng_from(seed));
            verify_factor(&pg, &t, &all).unwrap();
        }
    }

    #[test]
    fn restricted_domain() {
        let pg = random_blowup(5, 12, 0.6, 3);
        let domain = VertexSet::from_iter(pg.vertex_count(), (0..5).flat_map(|i| pg.part(i)[..7].to_vec()));
        let t = matching_chain(&pg, &domain, 3, &mut rng_from(1));
        let covered = check_disjoint(&pg, &t).unwrap();
        assert!(covered.is_subset(&domain));
    }
}
