//! Transversal paths by forward propagation, and transversal cycles through
//! prescribed anchors.

use rand::seq::SliceRandom;

use super::{FactorError, TransversalCycle};
use crate::graph::{neighborhood, PartitionedGraph, VertexSet};
use crate::rng::Rng;

/// Propagates `Z_0 = X_0`, `Z_s = N(Z_{s−1}) ∩ X_s` through the parts
/// `start, start+1, …` and backtracks a path. `sets[s]` is intersected
/// with part `start + s`. Exact: a path exists iff no layer dies.
fn layered_path(
    pg: &PartitionedGraph,
    start: usize,
    sets: &[VertexSet],
    mut rng: Option<&mut Rng>,
) -> Result<Vec<usize>, FactorError> {
    let g = pg.graph();
    let k = pg.k();
    let mut layers: Vec<VertexSet> = Vec::with_capacity(sets.len());
    for (s, x) in sets.iter().enumerate() {
        let part = (start + s) % k;
        let mut within = pg.part_set(part);
        within.intersect_with(x);
        let z = match layers.last() {
            None => within,
            Some(prev) => neighborhood(g, prev, Some(&within)),
        };
        if z.is_empty() {
            return Err(FactorError::PropagationDied { part });
        }
        layers.push(z);
    }
    let mut pick = |cands: Vec<usize>| -> usize {
        match rng.as_deref_mut() {
            Some(r) => *cands.choose(r).expect("nonempty layer"),
            None => cands[0],
        }
    };
    let mut path = vec![0; layers.len()];
    let last = layers.len() - 1;
    path[last] = pick(layers[last].to_vec());
    for s in (0..last).rev() {
        let next = path[s + 1];
        let cands: Vec<usize> = layers[s].iter().filter(|&v| g.has_edge(v, next)).collect();
        path[s] = pick(cands);
    }
    Ok(path)
}

/// A transversal path `x_i x_{i+1} … x_j` with `x_s ∈ sets[s − i]`. Parts
/// are taken cyclically, so `j < i` wraps around; `sets` must have one entry
/// per part on the way.
pub fn transversal_path(pg: &PartitionedGraph, i: usize, j: usize, sets: &[VertexSet]) -> Result<Vec<usize>, FactorError> {
    let k = pg.k();
    if i >= k || j >= k {
        return Err(FactorError::Unsupported(format!("part index out of range for k = {k}")));
    }
    let len = (j + k - i) % k + 1;
    if sets.len() != len {
        return Err(FactorError::Unsupported(format!("expected {len} sets from part {i} to part {j}, got {}", sets.len())));
    }
    layered_path(pg, i, sets, None)
}

/// Randomized variant of [`transversal_path`] used by the constructions.
pub fn transversal_path_between(
    pg: &PartitionedGraph,
    start: usize,
    sets: &[VertexSet],
    rng: &mut Rng,
) -> Result<Vec<usize>, FactorError> {
    layered_path(pg, start, sets, Some(rng))
}

/// A transversal cycle containing every anchor (`anchors[i]` must lie in
/// part `i`) and avoiding `forbidden` elsewhere. For each start vertex the
/// layered search is exact, so `NoCycle` means no such cycle exists.
pub fn transversal_cycle_through(
    pg: &PartitionedGraph,
    anchors: &[Option<usize>],
    forbidden: &VertexSet,
    rng: &mut Rng,
) -> Result<TransversalCycle, FactorError> {
    let k = pg.k();
    let n = pg.vertex_count();
    let g = pg.graph();
    if anchors.len() != k {
        return Err(FactorError::Unsupported(format!("{} anchors for k = {k}", anchors.len())));
    }
    let mut allowed: Vec<VertexSet> = Vec::with_capacity(k);
    for i in 0..k {
        let set = match anchors[i] {
            Some(a) => {
                if a >= n || pg.part_of(a) != i {
                    return Err(FactorError::InvalidCycle(format!("anchor {a} is not in part {i}")));
                }
                VertexSet::from_iter(n, [a])
            }
            None => {
                let mut s = pg.part_set(i);
                s.difference_with(forbidden);
                for nb in [anchors[pg.prev(i)], anchors[pg.next(i)]].into_iter().flatten() {
                    s.intersect_with(&g.neighbor_set(nb));
                }
                s
            }
        };
        if set.is_empty() {
            return Err(FactorError::NoCycle);
        }
        allowed.push(set);
    }
    cycle_within(pg, allowed, rng)
}

/// A transversal cycle with `x_i ∈ allowed[i]` for every part `i`, or
/// `NoCycle` after trying every start vertex of the smallest set.
pub(crate) fn cycle_within(
    pg: &PartitionedGraph,
    allowed: Vec<VertexSet>,
    rng: &mut Rng,
) -> Result<TransversalCycle, FactorError> {
    let k = pg.k();
    let n = pg.vertex_count();
    let g = pg.graph();
    if allowed.iter().any(VertexSet::is_empty) {
        return Err(FactorError::NoCycle);
    }
    let start = (0..k).min_by_key(|&i| allowed[i].len()).expect("k >= 3");
    let mut firsts = allowed[start].to_vec();
    firsts.shuffle(rng);
    for x in firsts {
        let mut sets: Vec<VertexSet> = (0..k).map(|s| allowed[(start + s) % k].clone()).collect();
        sets[0] = VertexSet::from_iter(n, [x]);
        sets[k - 1].intersect_with(&g.neighbor_set(x));
        if let Ok(path) = layered_path(pg, start, &sets, Some(rng)) {
            let mut vertices = vec![0; k];
            for (s, v) in path.into_iter().enumerate() {
                vertices[(start + s) % k] = v;
            }
            return TransversalCycle::new(pg, vertices);
        }
    }
    Err(FactorError::NoCycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::testutil::random_blowup;
    use crate::rng::rng_from;
    use rand::Rng as _;

    /// Brute force: try every tuple of the product of the sets.
    fn brute_path(pg: &PartitionedGraph, start: usize, sets: &[Vec<usize>]) -> bool {
        fn rec(pg: &PartitionedGraph, sets: &[Vec<usize>], s: usize, prev: Option<usize>) -> bool {
            if s == sets.len() {
                return true;
            }
            sets[s].iter().any(|&v| prev.is_none_or(|p| pg.graph().has_edge(p, v)) && rec(pg, sets, s + 1, Some(v)))
        }
        let _ = start;
        rec(pg, sets, 0, None)
    }

    fn brute_cycle(pg: &PartitionedGraph, anchors: &[Option<usize>], forbidden: &VertexSet) -> bool {
        let sets: Vec<Vec<usize>> = (0..pg.k())
            .map(|i| match anchors[i] {
                Some(a) => vec![a],
                None => pg.part(i).iter().copied().filter(|&v| !forbidden.contains(v)).collect(),
            })
            .collect();
        fn rec(pg: &PartitionedGraph, sets: &[Vec<usize>], path: &mut Vec<usize>) -> bool {
            let s = path.len();
            if s == sets.len() {
                return pg.graph().has_edge(path[s - 1], path[0]);
            }
            for &v in &sets[s] {
                if s == 0 || pg.graph().has_edge(path[s - 1], v) {
                    path.push(v);
                    if rec(pg, sets, path) {
                        return true;
                    }
                    path.pop();
                }
            }
            false
        }
        rec(pg, &sets, &mut Vec::new())
    }

    #[test]
    fn single_edge_path() {
        let pg = PartitionedGraph::contiguous(3, 2, [(0, 2)]).unwrap();
        let n = pg.vertex_count();
        let path = transversal_path(&pg, 0, 1, &[VertexSet::from_iter(n, [0]), VertexSet::from_iter(n, [2])]).unwrap();
        assert_eq!(path, vec![0, 2]);
        let err = transversal_path(&pg, 0, 1, &[VertexSet::from_iter(n, [1]), VertexSet::from_iter(n, [2])]);
        assert_eq!(err, Err(FactorError::PropagationDied { part: 1 }));
    }

    #[test]
    fn complete_blowup_always_has_paths_and_cycles() {
        let pg = PartitionedGraph::complete_blowup(5, 4).unwrap();
        let n = pg.vertex_count();
        let sets: Vec<VertexSet> = (0..5).map(|i| VertexSet::from_iter(n, [pg.part(i)[i % 4]])).collect();
        assert!(transversal_path(&pg, 0, 4, &sets).is_ok());
        let mut rng = rng_from(1);
        let mut anchors = vec![None; 5];
        anchors[2] = Some(pg.part(2)[3]);
        let c = transversal_cycle_through(&pg, &anchors, &VertexSet::new(n), &mut rng).unwrap();
        assert_eq!(c.vertices[2], pg.part(2)[3]);
    }

    #[test]
    fn path_matches_brute_force_on_dense_pairs() {
        // Density 0.5 pairs, part size 40, sets of size 10.
        let mut rng = rng_from(9);
        for trial in 0..30u64 {
            let pg = random_blowup(5, 40, 0.5, trial);
            let n = pg.vertex_count();
            let len = rng.gen_range(2..=5);
            let start = rng.gen_range(0..5);
            let raw: Vec<Vec<usize>> = (0..len)
                .map(|s| {
                    let mut part = pg.part(start + s).to_vec();
                    part.shuffle(&mut rng);
                    part.truncate(10);
                    part
                })
                .collect();
            let sets: Vec<VertexSet> = raw.iter().map(|r| VertexSet::from_iter(n, r.iter().copied())).collect();
            let got = transversal_path(&pg, start, (start + len - 1) % 5, &sets);
            assert_eq!(got.is_ok(), brute_path(&pg, start, &raw));
            if let Ok(path) = got {
                for (s, w) in path.windows(2).enumerate() {
                    assert!(pg.graph().has_edge(w[0], w[1]));
                    assert!(raw[s].contains(&w[0]));
                }
            }
        }
    }

    #[test]
    fn cycle_search_matches_brute_force() {
        let mut rng = rng_from(2);
        for trial in 0..200u64 {
            let k = rng.gen_range(3..=6);
            let pg = random_blowup(k, rng.gen_range(2..=6), rng.gen_range(0.2..0.7), trial);
            let n = pg.vertex_count();
            let mut anchors = vec![None; k];
            for a in anchors.iter_mut().enumerate() {
                if rng.gen_bool(0.3) {
                    *a.1 = Some(*pg.part(a.0).choose(&mut rng).unwrap());
                }
            }
            let forbidden = VertexSet::from_iter(n, (0..n).filter(|_| rng.gen_bool(0.2)));
            let got = transversal_cycle_through(&pg, &anchors, &forbidden, &mut rng);
            assert_eq!(got.is_ok(), brute_cycle(&pg, &anchors, &forbidden), "trial {trial}");
            if let Ok(c) = got {
                for (i, a) in anchors.iter().enumerate() {
                    if let Some(a) = a {
                        assert_eq!(c.vertices[i], *a);
                    } else {
                        assert!(!forbidden.contains(c.vertices[i]));
                    }
                }
            }
        }
    }

    #[test]
    fn k4_common_neighbor_case() {
        // y1 ∈ V_1 and y3 ∈ V_3 each see more than half of V_2.
        let pg = random_blowup(4, 10, 0.8, 4);
        let n = pg.vertex_count();
        let (y1, y3) = (pg.part(1)[0], pg.part(3)[0]);
        let common = pg.part(2).iter().filter(|&&v| pg.graph().has_edge(y1, v) && pg.graph().has_edge(y3, v)).count();
        let mut anchors = vec![None; 4];
        anchors[1] = Some(y1);
        anchors[3] = Some(y3);
        let got = transversal_cycle_through(&pg, &anchors, &VertexSet::new(n), &mut rng_from(0));
        assert_eq!(got.is_ok(), common > 0 && brute_cycle(&pg, &anchors, &VertexSet::new(n)));
    }
}
