//! Almost-perfect tilings and the full transversal factor pipeline.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::exact::exact_factor_within;
use super::absorb::{absorb, build_absorbing_set, complement, AbsorbingConfig};
use super::{
    balanced_parts, check_disjoint, exact_max_tiling, exact_transversal_factor, matching_chain, transversal_cycle_through,
    transversal_path_between, verify_factor, FactorError, Tiling, TransversalCycle, EXACT_FACTOR_CAP, EXACT_PART_CAP,
};
use crate::embed::Bipartite;
use crate::graph::{PartitionedGraph, VertexSet};
use crate::rng::{derive, rng_from, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TilingStrategy {
    /// Cycles through random anchors until every remaining vertex is stuck.
    Greedy,
    /// Maximum tiling by backtracking; part size at most 8.
    Exact,
    /// Gadget copies over a known block partition.
    PartitionRoute,
    /// Chained bipartite matchings.
    MatchingChain,
}

/// `blocks[i][b]` lists the vertices of block `b` of part `i`; every part
/// has the same number of blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub blocks: Vec<Vec<Vec<usize>>>,
}

impl BlockPartition {
    pub fn blocks_per_part(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    pub fn validate(&self, pg: &PartitionedGraph) -> Result<(), FactorError> {
        if self.blocks.len() != pg.k() {
            return Err(FactorError::Unsupported(format!("{} block lists for k = {}", self.blocks.len(), pg.k())));
        }
        let n0 = self.blocks_per_part();
        for (i, part) in self.blocks.iter().enumerate() {
            if part.len() != n0 || n0 == 0 {
                return Err(FactorError::Unsupported(format!("part {i} has {} blocks, expected {n0}", part.len())));
            }
            let mut seen = VertexSet::new(pg.vertex_count());
            for &v in part.iter().flatten() {
                if v >= pg.vertex_count() || pg.part_of(v) != i || !seen.insert(v) {
                    return Err(FactorError::Unsupported(format!("block vertex {v} is misplaced in part {i}")));
                }
            }
            if seen.len() != pg.part(i).len() {
                return Err(FactorError::Unsupported(format!("blocks of part {i} do not cover it")));
            }
        }
        Ok(())
    }
}

/// One gadget copy of the partition route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyReport {
    pub group: usize,
    /// Block index used in each part.
    pub blocks: Vec<usize>,
    /// Whether both pairs of the group come from the reduced-graph matchings.
    pub anchored: bool,
    pub block_size: usize,
    /// Largest number of uncovered vertices in one part of the copy.
    pub leftover: usize,
    /// `ζm/2`.
    pub bound: f64,
    pub within_bound: bool,
    pub exact_repair: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingReport {
    pub strategy: TilingStrategy,
    pub tiling: Tiling,
    pub domain_size: usize,
    pub uncovered: usize,
    /// `⌊ζ·|domain|⌋`.
    pub zeta_bound: usize,
    pub within_zeta: bool,
    pub shortfall: usize,
    pub copies: Vec<CopyReport>,
    pub notes: Vec<String>,
}

fn remove_cycle(left: &mut VertexSet, c: &TransversalCycle) {
    for &v in &c.vertices {
        left.remove(v);
    }
}

fn greedy_tiling(pg: &PartitionedGraph, domain: &VertexSet, rng: &mut Rng) -> Vec<TransversalCycle> {
    let n = pg.vertex_count();
    let mut left = domain.clone();
    // A vertex with no cycle in `left` never gets one later, as `left` shrinks.
    let mut dead = VertexSet::new(n);
    let mut cycles = Vec::new();
    loop {
        let mut live = left.clone();
        live.difference_with(&dead);
        let Some(&v) = live.to_vec().choose(rng) else { break };
        let mut anchors = vec![None; pg.k()];
        anchors[pg.part_of(v)] = Some(v);
        match transversal_cycle_through(pg, &anchors, &complement(n, &left), rng) {
            Ok(c) => {
                remove_cycle(&mut left, &c);
                cycles.push(c);
            }
            Err(_) => {
                dead.insert(v);
            }
        }
    }
    cycles
}

/// Tiles one gadget copy whose `k` blocks are `sets`: each cycle takes an
/// edge `uv` between parts `4g+1` and `4g+2`, then a transversal path from
/// `N(v)` in part `4g+3` around to `N(u)` in part `4g`.
fn tile_copy(pg: &PartitionedGraph, group: usize, sets: &[VertexSet], rng: &mut Rng) -> Vec<TransversalCycle> {
    let k = pg.k();
    let g = pg.graph();
    let (p0, p1, p2, p3) = (4 * group, 4 * group + 1, 4 * group + 2, (4 * group + 3) % k);
    let mut z: Vec<VertexSet> = sets.to_vec();
    let mut cycles = Vec::new();
    'outer: loop {
        let mut us = z[p1].to_vec();
        us.shuffle(rng);
        for u in us {
            let mut vs: Vec<usize> = z[p2].iter().filter(|&v| g.has_edge(u, v)).collect();
            vs.shuffle(rng);
            for v in vs {
                let mut q1 = g.neighbor_set(u);
                q1.intersect_with(&z[p0]);
                let mut q2 = g.neighbor_set(v);
                q2.intersect_with(&z[p3]);
                if q1.is_empty() || q2.is_empty() {
                    continue;
                }
                let mut path_sets: Vec<VertexSet> = (0..k - 2).map(|s| z[(p3 + s) % k].clone()).collect();
                path_sets[0] = q2;
                path_sets[k - 3] = q1;
                if let Ok(path) = transversal_path_between(pg, p3, &path_sets, rng) {
                    let mut vertices = vec![0; k];
                    vertices[p1] = u;
                    vertices[p2] = v;
                    for (s, w) in path.into_iter().enumerate() {
                        vertices[(p3 + s) % k] = w;
                    }
                    let c = TransversalCycle::new(pg, vertices).expect("gadget cycle uses host edges");
                    for (i, &w) in c.vertices.iter().enumerate() {
                        z[i].remove(w);
                    }
                    cycles.push(c);
                    continue 'outer;
                }
            }
        }
        break;
    }
    cycles
}

fn pair_density(pg: &PartitionedGraph, a: &VertexSet, b: &VertexSet) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let e: usize = a.iter().map(|v| pg.graph().degree_into(v, b)).sum();
    e as f64 / (a.len() * b.len()) as f64
}

/// How far the bipartite graph between two blocks is from having a
/// perfect matching.
fn pair_defect(pg: &PartitionedGraph, a: &VertexSet, b: &VertexSet) -> usize {
    let (a, b) = (a.to_vec(), b.to_vec());
    let mut bg = Bipartite::new(a.len(), b.len());
    for (x, &u) in a.iter().enumerate() {
        for (y, &v) in b.iter().enumerate() {
            if pg.graph().has_edge(u, v) {
                bg.add_edge(x, y);
            }
        }
    }
    a.len().max(b.len()) - bg.max_matching().size
}

/// Total shortfall of perfect matchings between consecutive blocks of the
/// copy. A perfect tiling restricts to a perfect matching on every
/// consecutive pair, so a positive value rules one out.
fn copy_defect(pg: &PartitionedGraph, bl: &[Vec<VertexSet>], assign: &[usize]) -> usize {
    let k = assign.len();
    (0..k).map(|i| pair_defect(pg, &bl[i][assign[i]], &bl[(i + 1) % k][assign[(i + 1) % k]])).sum()
}

type Copy = (usize, bool, Vec<usize>);

/// Block exchanges between two copies: one unanchored block, or a matched
/// pair of anchored blocks (parts `2t`, `2t+1`) between two copies of the
/// same group, so every anchor is still a reduced-graph matching edge.
fn block_moves(k: usize) -> Vec<Vec<usize>> {
    (0..k).map(|i| vec![i]).chain((0..k / 2).map(|t| vec![2 * t, 2 * t + 1])).collect()
}

fn legal_move(a: &Copy, b: &Copy, mv: &[usize]) -> bool {
    let anchored_at = |c: &Copy, i: usize| c.1 && i / 4 == c.0;
    if mv.len() == 1 {
        !anchored_at(a, mv[0]) && !anchored_at(b, mv[0])
    } else {
        anchored_at(a, mv[0]) && anchored_at(b, mv[0])
    }
}

fn swapped(a: &[usize], b: &[usize], mv: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    for &i in mv {
        std::mem::swap(&mut x[i], &mut y[i]);
    }
    (x, y)
}

/// Local search over block moves, lowering the total matching defect. Takes the best improving move when there is one and otherwise
/// a random sideways move. Returns the number of swaps made.
fn reassign_defective_blocks(pg: &PartitionedGraph, bl: &[Vec<VertexSet>], copies: &mut [Copy], rng: &mut Rng) -> usize {
    let moves = block_moves(pg.k());
    let mut defect: Vec<usize> = copies.iter().map(|c| copy_defect(pg, bl, &c.2)).collect();
    let mut moved = 0;
    for _ in 0..DEFECT_SEARCH_ROUNDS {
        let bad: Vec<usize> = (0..copies.len()).filter(|&c| defect[c] > 0).collect();
        let Some(&a) = bad.choose(rng) else { break };
        let mut best: Option<(usize, usize, usize, usize)> = None;
        let mut sideways = Vec::new();
        for (mi, mv) in moves.iter().enumerate() {
            for b in (0..copies.len()).filter(|&b| b != a && legal_move(&copies[a], &copies[b], mv)) {
                let (x, y) = swapped(&copies[a].2, &copies[b].2, mv);
                let (da, db) = (copy_defect(pg, bl, &x), copy_defect(pg, bl, &y));
                if da + db < defect[a] + defect[b] && best.is_none_or(|t| da + db < t.2 + t.3) {
                    best = Some((mi, b, da, db));
                } else if da + db == defect[a] + defect[b] {
                    sideways.push((mi, b, da, db));
                }
            }
        }
        let Some((mi, b, da, db)) = best.or_else(|| sideways.choose(rng).copied()) else { continue };
        let (x, y) = swapped(&copies[a].2, &copies[b].2, &moves[mi]);
        (copies[a].2, copies[b].2) = (x, y);
        defect[a] = da;
        defect[b] = db;
        moved += 1;
    }
    moved
}

/// Moves tried by the matching-defect search.
const DEFECT_SEARCH_ROUNDS: usize = 2000;

/// Node budget per exact check while swapping blocks.
const SWAP_CHECK_NODES: u64 = 200_000;

/// For copies without a perfect tiling that the exact search can find
/// quickly, tries each block move and keeps the first one after which both
/// copies involved have one. Returns the number of swaps made.
fn reassign_unfactored_blocks(pg: &PartitionedGraph, bl: &[Vec<VertexSet>], copies: &mut [Copy]) -> usize {
    let k = pg.k();
    if k > EXACT_FACTOR_CAP || bl.iter().flatten().any(|b| b.len() > EXACT_PART_CAP) {
        return 0;
    }
    let domain = |assign: &[usize]| {
        let mut d = VertexSet::new(pg.vertex_count());
        for (i, &b) in assign.iter().enumerate() {
            d.union_with(&bl[i][b]);
        }
        d
    };
    let perfect = |assign: &[usize]| {
        let d = domain(assign);
        pg.is_balanced(&d) && matches!(exact_factor_within(pg, &d, SWAP_CHECK_NODES), Ok(Some(_)))
    };
    let moves = block_moves(k);
    let mut ok: Vec<bool> = copies.iter().map(|c| perfect(&c.2)).collect();
    let mut moved = 0;
    for a in 0..copies.len() {
        if ok[a] {
            continue;
        }
        'search: for mv in &moves {
            for b in (0..copies.len()).filter(|&b| b != a && legal_move(&copies[a], &copies[b], mv)) {
                let (x, y) = swapped(&copies[a].2, &copies[b].2, mv);
                if perfect(&x) && perfect(&y) {
                    (copies[a].2, copies[b].2) = (x, y);
                    ok[a] = true;
                    ok[b] = true;
                    moved += 1;
                    break 'search;
                }
            }
        }
    }
    moved
}

fn partition_route(
    pg: &PartitionedGraph,
    domain: &VertexSet,
    zeta: f64,
    blocks: &BlockPartition,
    rng: &mut Rng,
    notes: &mut Vec<String>,
) -> Result<(Vec<TransversalCycle>, Vec<CopyReport>), FactorError> {
    let k = pg.k();
    let n = pg.vertex_count();
    if k % 4 != 0 {
        return Err(FactorError::Unsupported(format!("the partition route needs k divisible by 4, got {k}")));
    }
    blocks.validate(pg)?;
    let n0 = blocks.blocks_per_part();
    let bl: Vec<Vec<VertexSet>> = blocks
        .blocks
        .iter()
        .map(|part| {
            part.iter()
                .map(|b| {
                    let mut s = VertexSet::from_iter(n, b.iter().copied());
                    s.intersect_with(domain);
                    s
                })
                .collect()
        })
        .collect();
    // Reduced graph: a block pair is an edge when its density is at least
    // half the average density of its part pair. Pairs that also have a
    // perfect matching are preferred when they give as large a matching,
    // since an anchored pair is never split up later.
    let mut matchings = Vec::with_capacity(k / 2);
    for t in 0..k / 2 {
        let (a, b) = (2 * t, 2 * t + 1);
        let dens: Vec<Vec<f64>> = (0..n0).map(|x| (0..n0).map(|y| pair_density(pg, &bl[a][x], &bl[b][y])).collect()).collect();
        let mean = dens.iter().flatten().sum::<f64>() / (n0 * n0) as f64;
        let mut loose = Bipartite::new(n0, n0);
        let mut strict = Bipartite::new(n0, n0);
        for (x, row) in dens.iter().enumerate() {
            for (y, &d) in row.iter().enumerate() {
                if d > 0.0 && d >= mean / 2.0 {
                    loose.add_edge(x, y);
                    if pair_defect(pg, &bl[a][x], &bl[b][y]) == 0 {
                        strict.add_edge(x, y);
                    }
                }
            }
        }
        let (ms, ml) = (strict.max_matching(), loose.max_matching());
        let m = if ms.size >= ml.size { ms } else { ml };
        let mut pairs: Vec<(usize, usize)> = m.pairs().collect();
        pairs.shuffle(rng);
        matchings.push(pairs);
    }
    // Copies per group, spread evenly and capped by the matchings.
    let groups = k / 4;
    let caps: Vec<usize> = (0..groups).map(|g| matchings[2 * g].len().min(matchings[2 * g + 1].len())).collect();
    let mut counts = vec![0; groups];
    let mut anchored_total = 0;
    while anchored_total < n0 {
        let Some(g) = (0..groups).filter(|&g| counts[g] < caps[g]).min_by_key(|&g| counts[g]) else { break };
        counts[g] += 1;
        anchored_total += 1;
    }
    if anchored_total < n0 {
        notes.push(format!("reduced-graph matchings anchor only {anchored_total} of {n0} copies"));
    }
    let mut free: Vec<Vec<bool>> = vec![vec![true; n0]; k];
    let mut copies: Vec<(usize, bool, Vec<Option<usize>>)> = Vec::with_capacity(n0);
    for g in 0..groups {
        for c in 0..counts[g] {
            let mut assign = vec![None; k];
            for (t, (x, y)) in [(2 * g, matchings[2 * g][c]), (2 * g + 1, matchings[2 * g + 1][c])] {
                assign[2 * t] = Some(x);
                assign[2 * t + 1] = Some(y);
                free[2 * t][x] = false;
                free[2 * t + 1][y] = false;
            }
            copies.push((g, true, assign));
        }
    }
    for c in anchored_total..n0 {
        copies.push((c % groups, false, vec![None; k]));
    }
    for i in 0..k {
        let mut rest: Vec<usize> = (0..n0).filter(|&b| free[i][b]).collect();
        rest.shuffle(rng);
        let mut rest = rest.into_iter();
        for copy in copies.iter_mut() {
            if copy.2[i].is_none() {
                copy.2[i] = rest.next();
            }
        }
    }
    let mut copies: Vec<Copy> =
        copies.into_iter().map(|(g, a, assign)| (g, a, assign.into_iter().map(|b| b.expect("every block is assigned")).collect())).collect();
    let moved = reassign_defective_blocks(pg, &bl, &mut copies, rng);
    if moved > 0 {
        notes.push(format!("{moved} block swaps to give consecutive blocks perfect matchings"));
    }
    let moved = reassign_unfactored_blocks(pg, &bl, &mut copies);
    if moved > 0 {
        notes.push(format!("{moved} block swaps to give copies a perfect tiling"));
    }
    let mut cycles = Vec::new();
    let mut reports = Vec::with_capacity(n0);
    for (group, anchored, assign) in copies {
        let sets: Vec<VertexSet> = (0..k).map(|i| bl[i][assign[i]].clone()).collect();
        let block_size = (0..k).map(|i| blocks.blocks[i][assign[i]].len()).max().unwrap_or(0);
        let mut got = tile_copy(pg, group, &sets, rng);
        let mut union = VertexSet::new(n);
        for s in &sets {
            union.union_with(s);
        }
        let mut exact_repair = false;
        let per_part_max = sets.iter().map(VertexSet::len).max().unwrap_or(0);
        if got.len() < per_part_max && per_part_max <= EXACT_FACTOR_CAP && k <= EXACT_FACTOR_CAP && pg.is_balanced(&union) {
            if let Ok(Some(f)) = exact_transversal_factor(pg, &union) {
                got = f;
                exact_repair = true;
            } else if let Ok((better, _)) = exact_max_tiling(pg, &union) {
                if better.len() > got.len() {
                    got = better;
                    exact_repair = true;
                }
            }
        }
        let mut left: Vec<usize> = sets.iter().map(VertexSet::len).collect();
        for _ in &got {
            left.iter_mut().for_each(|l| *l -= 1);
        }
        let leftover = left.into_iter().max().unwrap_or(0);
        let bound = zeta * block_size as f64 / 2.0;
        reports.push(CopyReport {
            group,
            blocks: assign,
            anchored,
            block_size,
            leftover,
            bound,
            within_bound: leftover as f64 <= bound + 1e-9,
            exact_repair,
        });
        cycles.extend(got);
    }
    Ok((cycles, reports))
}

/// Tiles `pg[domain]` with the chosen strategy and reports how far it is
/// from covering all but `ζ·|domain|` vertices. Falling short is reported,
/// not an error.
pub fn almost_tiling(
    pg: &PartitionedGraph,
    domain: &VertexSet,
    zeta: f64,
    strategy: TilingStrategy,
    blocks: Option<&BlockPartition>,
    seed: u64,
) -> Result<TilingReport, FactorError> {
    let mut rng = rng_from(derive(seed, "tiling"));
    let mut notes = Vec::new();
    let mut copies = Vec::new();
    let cycles = match strategy {
        TilingStrategy::Greedy => greedy_tiling(pg, domain, &mut rng),
        TilingStrategy::MatchingChain => matching_chain(pg, domain, 5, &mut rng),
        TilingStrategy::Exact => {
            let per = balanced_parts(pg, domain)?[0].len();
            if per > EXACT_FACTOR_CAP || pg.k() > EXACT_FACTOR_CAP {
                return Err(FactorError::TooLarge(format!("exact tiling needs part size and k at most {EXACT_FACTOR_CAP}")));
            }
            let (c, complete) = exact_max_tiling(pg, domain)?;
            if !complete {
                notes.push("exact search hit its node budget".into());
            }
            c
        }
        TilingStrategy::PartitionRoute => {
            let blocks = blocks.ok_or_else(|| FactorError::Unsupported("the partition route needs block metadata".into()))?;
            let (c, r) = partition_route(pg, domain, zeta, blocks, &mut rng, &mut notes)?;
            copies = r;
            c
        }
    };
    let covered = check_disjoint(pg, &cycles)?;
    if !covered.is_subset(domain) {
        return Err(FactorError::Coverage("tiling leaves its domain".into()));
    }
    let mut uncovered = domain.clone();
    uncovered.difference_with(&covered);
    let tiling = Tiling { cycles, uncovered };
    tiling.validate(pg, domain)?;
    let count = tiling.uncovered.len();
    let zeta_bound = (zeta * domain.len() as f64 + 1e-9).floor() as usize;
    Ok(TilingReport {
        strategy,
        domain_size: domain.len(),
        uncovered: count,
        zeta_bound,
        within_zeta: count <= zeta_bound,
        shortfall: count.saturating_sub(zeta_bound),
        tiling,
        copies,
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    pub absorbing: AbsorbingConfig,
    pub strategy: TilingStrategy,
    pub zeta: f64,
    pub blocks: Option<BlockPartition>,
    /// Fall back to the exact solver (small parts) or a whole-graph tiling
    /// when the absorbing route fails.
    pub fallback: bool,
}

impl Default for FactorParams {
    fn default() -> Self {
        FactorParams {
            absorbing: AbsorbingConfig::default(),
            strategy: TilingStrategy::MatchingChain,
            zeta: 0.1,
            blocks: None,
            fallback: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorRoute {
    /// Absorbing set, tiling of the rest, absorption of the leftover.
    Absorbing,
    /// Exact backtracking on a small instance.
    Exact,
    /// Chained matchings on the whole graph.
    MatchingChain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorRun {
    pub route: FactorRoute,
    pub factor: Vec<TransversalCycle>,
    pub absorbing_size: Option<usize>,
    pub tiling_uncovered: Option<usize>,
    pub notes: Vec<String>,
}

fn absorbing_route(
    pg: &PartitionedGraph,
    params: &FactorParams,
    seed: u64,
) -> Result<(Vec<TransversalCycle>, usize, usize), FactorError> {
    let r = build_absorbing_set(pg, &params.absorbing, derive(seed, "absorbing set"))?;
    let mut rest = complement(pg.vertex_count(), &r.vertices);
    // Fanless vertices cannot be absorbed, so they get cycles first.
    let mut rng = rng_from(derive(seed, "fanless"));
    let mut first = Vec::with_capacity(r.fanless.len());
    for &v in &r.fanless {
        if !rest.contains(v) {
            continue;
        }
        let mut anchors = vec![None; pg.k()];
        anchors[pg.part_of(v)] = Some(v);
        let c = transversal_cycle_through(pg, &anchors, &complement(pg.vertex_count(), &rest), &mut rng)
            .map_err(|_| FactorError::Starved { stage: "fanless cover".into(), shortfall: 1 })?;
        remove_cycle(&mut rest, &c);
        first.push(c);
    }
    let report = almost_tiling(pg, &rest, params.zeta, params.strategy, params.blocks.as_ref(), derive(seed, "tiling"))?;
    let leftover = report.tiling.uncovered.clone();
    let per_part = balanced_parts(pg, &leftover)?[0].len();
    if per_part > r.max_leftover_per_part {
        return Err(FactorError::Starved {
            stage: "tiling".into(),
            shortfall: per_part - r.max_leftover_per_part,
        });
    }
    let mut factor = absorb(pg, &r, &leftover, derive(seed, "absorb"))?;
    factor.extend(first);
    factor.extend(report.tiling.cycles);
    Ok((factor, r.size(), report.uncovered))
}

/// A verified transversal `C_k`-factor: absorbing set, tiling of the rest,
/// absorption of the leftover. With `fallback`, a failed absorbing route is
/// followed by the exact solver on small instances (whose "none" is a
/// proof) or a whole-graph matching chain. The route taken is reported.
pub fn transversal_factor(pg: &PartitionedGraph, params: &FactorParams, seed: u64) -> Result<FactorRun, FactorError> {
    let k = pg.k();
    let n = pg.part_size();
    let all = pg.graph().all_vertices();
    let mut notes = Vec::new();
    let err = match absorbing_route(pg, params, seed) {
        Ok((factor, size, uncovered)) => {
            verify_factor(pg, &factor, &all)?;
            return Ok(FactorRun {
                route: FactorRoute::Absorbing,
                factor,
                absorbing_size: Some(size),
                tiling_uncovered: Some(uncovered),
                notes,
            });
        }
        Err(e) => e,
    };
    notes.push(format!("absorbing route failed: {err}"));
    if !params.fallback {
        return Err(err);
    }
    if n <= EXACT_PART_CAP && k <= EXACT_FACTOR_CAP {
        match exact_transversal_factor(pg, &all) {
            Ok(Some(factor)) => {
                verify_factor(pg, &factor, &all)?;
                return Ok(FactorRun { route: FactorRoute::Exact, factor, absorbing_size: None, tiling_uncovered: None, notes });
            }
            Ok(None) => return Err(FactorError::NoFactor),
            Err(FactorError::TooLarge(why)) => notes.push(format!("exact search gave up: {why}")),
            Err(e) => return Err(e),
        }
    }
    let factor = matching_chain(pg, &all, 10, &mut rng_from(derive(seed, "fallback")));
    if factor.len() < n {
        return Err(FactorError::Starved { stage: "fallback tiling".into(), shortfall: n - factor.len() });
    }
    verify_factor(pg, &factor, &all)?;
    Ok(FactorRun { route: FactorRoute::MatchingChain, factor, absorbing_size: None, tiling_uncovered: Some(0), notes })
}
