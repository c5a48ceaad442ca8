//! Instance generators with metadata recording what each construction
//! guarantees.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factor::BlockPartition;
use crate::graph::{induced_subgraph, pair_min_degree, Graph, GraphError, PartitionedGraph, VertexSet};
use crate::hole::{alpha_star_b_exact, alpha_star_exact, HoleError, BLOWUP_EXACT_CAP, EXACT_CAP};
use crate::rng::{derive, rng_from, Rng};
use crate::tree::{Tree, TreeError};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("partition retries exhausted after {retries}: vertex {vertex} has {degree} neighbours in part {part} (needs {needed})")]
    PartitionCap { retries: usize, vertex: usize, part: usize, degree: usize, needed: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Hole(#[from] HoleError),
}

/// How a hole bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// True by construction.
    Planted,
    /// Holds with high probability (union bound).
    Whp,
    /// Computed or known exactly.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub seed: u64,
    pub construction: String,
    pub vertex_count: usize,
    pub k: Option<usize>,
    pub part_size: Option<usize>,
    /// `δ(G)` for plain graphs, `δ̄(G)` for blow-ups.
    pub min_degree: usize,
    /// Upper bound on `α*` (plain graphs) or `α*_b` (blow-ups).
    pub hole_bound: usize,
    pub hole_bound_mode: BoundMode,
    /// Edges added by min-degree repair.
    pub repairs: usize,
    pub blocks: Option<BlockPartition>,
    pub notes: Vec<String>,
}

/// Union bound: no `(t,t)`-hole among `pairs` pairs of `n`-sets once
/// `t·ln(1/(1−p)) > 2 ln n + ln(pairs)/t`.
fn union_hole_bound(n: usize, p: f64, pairs: usize) -> usize {
    if p >= 1.0 {
        return 0;
    }
    let q = -(1.0 - p).ln();
    let ln_n = (n.max(2) as f64).ln();
    let extra = (pairs.max(1) as f64).ln();
    let mut t = 1usize;
    while (t as f64) * q <= 2.0 * ln_n + extra / t as f64 && t < n {
        t += 1;
    }
    t.min(n)
}

/// A dense base of minimum degree at least `εn` (a randomly relabelled
/// circulant) united with `G(n, p)`. `α*` is below the union-bound value
/// `≈ 2 ln n / ln(1/(1−p))` with high probability.
pub fn gen_low_hole_graph(n: usize, eps: f64, p: f64, seed: u64) -> Result<(Graph, InstanceMetadata), GenError> {
    if !(eps > 0.0 && eps < 1.0) || !(p > 0.0 && p <= 1.0) || n < 2 {
        return Err(GenError::Infeasible(format!("need 0 < eps < 1, 0 < p <= 1, n >= 2 (got eps = {eps}, p = {p}, n = {n})")));
    }
    let mut rng = rng_from(derive(seed, "low-hole"));
    let need = ((eps * n as f64) - 1e-9).ceil() as usize;
    let reach = need.div_ceil(2).min((n - 1) / 2 + 1);
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(&mut rng);
    let mut adj = vec![VertexSet::new(n); n];
    let add = |a: usize, b: usize, adj: &mut Vec<VertexSet>| {
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    };
    for i in 0..n {
        for s in 1..=reach {
            add(label[i], label[(i + s) % n], &mut adj);
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                add(a, b, &mut adj);
            }
        }
    }
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| adj[a].iter().filter(move |&b| b > a).map(move |b| (a, b))).collect();
    let g = Graph::from_edges(n, edges)?;
    let guaranteed = need.min(n - 1);
    assert!(g.min_degree() >= guaranteed, "circulant base has degree at least εn");
    let meta = InstanceMetadata {
        seed,
        construction: "low_hole".into(),
        vertex_count: n,
        k: None,
        part_size: None,
        min_degree: guaranteed,
        hole_bound: union_hole_bound(n, p, 1),
        hole_bound_mode: if p >= 1.0 { BoundMode::Exact } else { BoundMode::Whp },
        repairs: 0,
        blocks: None,
        notes: vec![format!("eps = {eps}, p = {p}")],
    };
    Ok((g, meta))
}

/// Every consecutive pair of parts is `G(n, n, p)`, repaired by random
/// extra edges until each vertex has at least `⌈δn⌉` neighbours in both
/// adjacent parts. With `blocks = Some(N₀)` each part is cut into `N₀`
/// equal blocks whose pairs are random bipartite graphs of density `p`.
pub fn gen_blowup(
    n: usize,
    k: usize,
    delta: f64,
    p: f64,
    blocks: Option<usize>,
    seed: u64,
) -> Result<(PartitionedGraph, InstanceMetadata), GenError> {
    if k < 3 || n == 0 || !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&delta) {
        return Err(GenError::Infeasible(format!("need k >= 3, n >= 1, p and delta in [0, 1] (got k = {k}, n = {n})")));
    }
    if let Some(b) = blocks {
        if b == 0 || n % b != 0 {
            return Err(GenError::Infeasible(format!("{b} blocks do not divide part size {n}")));
        }
    }
    let need = ((delta * n as f64) - 1e-9).ceil() as usize;
    let mut rng = rng_from(derive(seed, "blowup"));
    let mut adj: Vec<VertexSet> = vec![VertexSet::new(k * n); k * n];
    for i in 0..k {
        let j = (i + 1) % k;
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(p) {
                    adj[i * n + a].insert(j * n + b);
                    adj[j * n + b].insert(i * n + a);
                }
            }
        }
    }
    let mut repairs = 0;
    for i in 0..k {
        for side in [(i + 1) % k, (i + k - 1) % k] {
            for a in 0..n {
                let v = i * n + a;
                let target: Vec<usize> = (side * n..(side + 1) * n).collect();
                let mut missing: Vec<usize> = target.iter().copied().filter(|&w| !adj[v].contains(w)).collect();
                let have = n - missing.len();
                if have < need {
                    missing.shuffle(&mut rng);
                    for &w in &missing[..need - have] {
                        adj[v].insert(w);
                        adj[w].insert(v);
                        repairs += 1;
                    }
                }
            }
        }
    }
    let edges: Vec<(usize, usize)> =
        (0..k * n).flat_map(|a| adj[a].iter().filter(move |&b| b > a).map(move |b| (a, b))).collect();
    let pg = PartitionedGraph::contiguous(k, n, edges)?;
    assert!(pair_min_degree(&pg) >= need, "repair reaches the target degree");
    let block_meta = blocks.map(|b| BlockPartition {
        blocks: (0..k).map(|i| pg.part(i).chunks(n / b).map(<[usize]>::to_vec).collect()).collect(),
    });
    let mut notes = vec![format!("delta = {delta}, p = {p}")];
    if repairs > 0 {
        notes.push(format!("min-degree repair added {repairs} edges"));
    }
    let meta = InstanceMetadata {
        seed,
        construction: "blowup".into(),
        vertex_count: k * n,
        k: Some(k),
        part_size: Some(n),
        min_degree: need,
        hole_bound: union_hole_bound(n, p, k),
        hole_bound_mode: if p >= 1.0 { BoundMode::Exact } else { BoundMode::Whp },
        repairs,
        blocks: block_meta,
        notes,
    };
    Ok((pg, meta))
}

/// Space barrier without the high-girth overlay: `U_i ⊆ V_i` of size
/// `n/k − 1` and every edge between `U_i` and `V_{i±1}`. Every edge meets
/// `U`, so each transversal `C_k` needs `⌈k/2⌉` vertices of `U`; `n` cycles
/// would need `n⌈k/2⌉ > n − k = |U|`, hence no transversal factor.
pub fn gen_space_barrier(n: usize, k: usize, seed: u64) -> Result<(PartitionedGraph, InstanceMetadata), GenError> {
    if k < 3 || n == 0 || n % k != 0 || n / k < 2 {
        return Err(GenError::Infeasible(format!("space barrier needs k >= 3 dividing n with n/k >= 2 (got n = {n}, k = {k})")));
    }
    let mut rng = rng_from(derive(seed, "space-barrier"));
    let u_size = n / k - 1;
    let u: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            let mut p: Vec<usize> = (i * n..(i + 1) * n).collect();
            p.shuffle(&mut rng);
            p.truncate(u_size);
            p
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..k {
        for &a in &u[i] {
            for side in [(i + 1) % k, (i + k - 1) % k] {
                for w in side * n..(side + 1) * n {
                    edges.push((a.min(w), a.max(w)));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let pg = PartitionedGraph::contiguous(k, n, edges)?;
    let meta = InstanceMetadata {
        seed,
        construction: "space_barrier".into(),
        vertex_count: k * n,
        k: Some(k),
        part_size: Some(n),
        min_degree: u_size,
        hole_bound: n - u_size,
        hole_bound_mode: BoundMode::Exact,
        repairs: 0,
        blocks: None,
        notes: vec![
            format!("U = {:?}", u),
            format!(
                "no transversal factor: each cycle needs {} U-vertices, {n} cycles need {}, |U| = {}",
                k.div_ceil(2),
                n * k.div_ceil(2),
                k * u_size
            ),
        ],
    };
    Ok((pg, meta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeProfile {
    Random,
    Path,
    StarHeavy,
    Caterpillar,
    Spider,
    Broom,
}

impl std::str::FromStr for TreeProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "random" => TreeProfile::Random,
            "path" => TreeProfile::Path,
            "star_heavy" | "star-heavy" => TreeProfile::StarHeavy,
            "caterpillar" => TreeProfile::Caterpillar,
            "spider" => TreeProfile::Spider,
            "broom" => TreeProfile::Broom,
            other => return Err(format!("unknown tree profile `{other}`")),
        })
    }
}

/// Grows a tree by attaching vertices; `parent_of` picks the parent of each
/// new vertex given current degrees.
struct Builder {
    parents: Vec<usize>,
    degree: Vec<usize>,
}

impl Builder {
    fn new() -> Self {
        Builder { parents: Vec::new(), degree: vec![0] }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    fn attach(&mut self, p: usize) -> usize {
        self.parents.push(p);
        self.degree[p] += 1;
        self.degree.push(1);
        self.len() - 1
    }

    fn finish(self) -> Result<Tree, GenError> {
        Ok(Tree::from_parents(&self.parents)?)
    }
}

fn random_attach(b: &mut Builder, n: usize, delta_max: usize, rng: &mut Rng) {
    let mut open: Vec<usize> = (0..b.len()).filter(|&v| b.degree[v] < delta_max).collect();
    while b.len() < n {
        let i = rng.gen_range(0..open.len());
        let p = open[i];
        let v = b.attach(p);
        if b.degree[p] >= delta_max {
            open.swap_remove(i);
        }
        open.push(v);
    }
}

/// A tree on `n` vertices with maximum degree at most `delta_max`.
pub fn gen_tree(n: usize, delta_max: usize, profile: TreeProfile, seed: u64) -> Result<Tree, GenError> {
    let branching = !matches!(profile, TreeProfile::Path | TreeProfile::Random);
    if n < 3 || delta_max < 2 || (branching && delta_max < 3) {
        return Err(GenError::Infeasible(format!("{profile:?} tree needs n >= 3 and delta_max >= {}", if branching { 3 } else { 2 })));
    }
    let mut rng = rng_from(derive(seed, "tree"));
    let mut b = Builder::new();
    match profile {
        TreeProfile::Path => {
            while b.len() < n {
                let last = b.len() - 1;
                b.attach(last);
            }
        }
        TreeProfile::Random => random_attach(&mut b, n, delta_max, &mut rng),
        TreeProfile::StarHeavy => {
            // Random core; every core vertex gets a pendant star (centre
            // plus Δ−1 leaves) while room lasts.
            let unit = delta_max + 1;
            let core = (n / (unit + 1)).max(1);
            random_attach(&mut b, core, delta_max - 1, &mut rng);
            let mut order: Vec<usize> = (0..core).collect();
            order.shuffle(&mut rng);
            for c in order {
                if b.len() + unit > n {
                    break;
                }
                let centre = b.attach(c);
                for _ in 0..delta_max - 1 {
                    b.attach(centre);
                }
            }
            random_attach(&mut b, n, delta_max, &mut rng);
        }
        TreeProfile::Caterpillar => {
            let per = delta_max - 2;
            let spine = n.div_ceil(per + 1).max(2);
            while b.len() < spine {
                let last = b.len() - 1;
                b.attach(last);
            }
            let mut s = 0;
            while b.len() < n {
                if b.degree[s] < delta_max {
                    b.attach(s);
                }
                s = (s + 1) % spine;
            }
        }
        TreeProfile::Spider => {
            let legs = delta_max;
            let mut ends = vec![0; legs];
            let mut l = 0;
            while b.len() < n {
                ends[l] = b.attach(ends[l]);
                l = (l + 1) % legs;
            }
        }
        TreeProfile::Broom => {
            let bristles = (delta_max - 1).min(n - 2);
            while b.len() < n - bristles {
                let last = b.len() - 1;
                b.attach(last);
            }
            let end = b.len() - 1;
            while b.len() < n {
                b.attach(end);
            }
        }
    }
    let t = b.finish()?;
    debug_assert!(t.max_degree() <= delta_max);
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedPartition {
    pub parts: Vec<Vec<usize>>,
    pub retries: usize,
    /// Smallest `d_{V_i}(v) / |V_i|` seen in the accepted sample.
    pub min_ratio_permille: usize,
    /// `(vertex, part)` pairs below the degree target. Zero unless the
    /// sample was accepted by [`best_effort_partition`].
    pub violations: usize,
}

const PARTITION_CAP: usize = 100;

/// Uniformly random partition into parts of the given sizes, resampled
/// until every vertex has `d_{V_i}(v) ≥ min_frac·|V_i|` for every part,
/// at most 100 times.
pub fn random_balanced_partition(g: &Graph, sizes: &[usize], min_frac: f64, seed: u64) -> Result<BalancedPartition, GenError> {
    let ground: Vec<usize> = (0..g.vertex_count()).collect();
    sample_partition(g, &ground, sizes, min_frac, seed, false)
}

/// Splits `ground` at random into parts of the given sizes, checking the
/// degree target for every vertex of `g`. After 100 failed samples the one
/// with the fewest violations is returned instead of an error.
pub fn best_effort_partition(g: &Graph, ground: &[usize], sizes: &[usize], min_frac: f64, seed: u64) -> Result<BalancedPartition, GenError> {
    sample_partition(g, ground, sizes, min_frac, seed, true)
}

fn sample_partition(
    g: &Graph,
    ground: &[usize],
    sizes: &[usize],
    min_frac: f64,
    seed: u64,
    best_effort: bool,
) -> Result<BalancedPartition, GenError> {
    let n = g.vertex_count();
    if sizes.iter().sum::<usize>() != ground.len() {
        return Err(GenError::Infeasible(format!(
            "part sizes sum to {}, ground set has {} vertices",
            sizes.iter().sum::<usize>(),
            ground.len()
        )));
    }
    let mut rng = rng_from(derive(seed, "partition"));
    let mut worst = (0, 0, 0, 0);
    let mut best: Option<BalancedPartition> = None;
    for retry in 0..PARTITION_CAP {
        let mut order = ground.to_vec();
        order.shuffle(&mut rng);
        let mut parts = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &s in sizes {
            let mut p = order[at..at + s].to_vec();
            p.sort_unstable();
            parts.push(p);
            at += s;
        }
        let sets: Vec<VertexSet> = parts.iter().map(|p| VertexSet::from_iter(n, p.iter().copied())).collect();
        let mut violations = 0;
        let mut min_ratio = 1.0f64;
        'check: for v in 0..n {
            for (i, s) in sets.iter().enumerate() {
                if s.is_empty() {
                    continue;
                }
                let d = g.degree_into(v, s);
                let needed = (min_frac * s.len() as f64 - 1e-9).ceil() as usize;
                min_ratio = min_ratio.min(d as f64 / s.len() as f64);
                if d < needed {
                    if violations == 0 {
                        worst = (v, i, d, needed);
                    }
                    violations += 1;
                    if !best_effort {
                        break 'check;
                    }
                }
            }
        }
        let sample = BalancedPartition {
            parts,
            retries: retry,
            min_ratio_permille: (min_ratio * 1000.0).floor() as usize,
            violations,
        };
        if violations == 0 {
            return Ok(sample);
        }
        if best_effort && best.as_ref().is_none_or(|b| violations < b.violations) {
            best = Some(sample);
        }
    }
    match best {
        Some(mut b) => {
            b.retries = PARTITION_CAP;
            Ok(b)
        }
        None => Err(GenError::PartitionCap { retries: PARTITION_CAP, vertex: worst.0, part: worst.1, degree: worst.2, needed: worst.3 }),
    }
}

/// Outcome of checking metadata claims against an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataCheck {
    pub min_degree_ok: bool,
    /// Exact hole value when the instance is under the exact cap.
    pub exact_hole: Option<usize>,
    /// Largest exact value over random induced subinstances otherwise.
    pub sampled_hole: Option<usize>,
    pub hole_ok: bool,
}

/// Checks `δ(G)` exactly and `α*` exactly when `n` is under the cap, or on
/// 10 random induced subgraphs of cap size otherwise (a lower bound on
/// `α*`, so this can refute but not confirm the claim).
pub fn check_graph_metadata(g: &Graph, meta: &InstanceMetadata, seed: u64) -> Result<MetadataCheck, GenError> {
    let n = g.vertex_count();
    let min_degree_ok = g.min_degree() >= meta.min_degree;
    if n <= EXACT_CAP {
        let v = alpha_star_exact(g)?.value;
        return Ok(MetadataCheck { min_degree_ok, exact_hole: Some(v), sampled_hole: None, hole_ok: v <= meta.hole_bound });
    }
    let mut rng = rng_from(derive(seed, "metadata"));
    let mut best = 0;
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..10 {
        let pick = VertexSet::from_iter(n, all.choose_multiple(&mut rng, EXACT_CAP).copied());
        let (sub, _) = induced_subgraph(g, &pick);
        best = best.max(alpha_star_exact(&sub)?.value);
    }
    Ok(MetadataCheck { min_degree_ok, exact_hole: None, sampled_hole: Some(best), hole_ok: best <= meta.hole_bound })
}

/// Blow-up counterpart of [`check_graph_metadata`] for `δ̄` and `α*_b`;
/// large instances are checked on 10 random balanced subinstances.
pub fn check_blowup_metadata(pg: &PartitionedGraph, meta: &InstanceMetadata, seed: u64) -> Result<MetadataCheck, GenError> {
    let min_degree_ok = pair_min_degree(pg) >= meta.min_degree;
    if pg.part_size() <= BLOWUP_EXACT_CAP {
        let v = alpha_star_b_exact(pg, BLOWUP_EXACT_CAP)?.value;
        return Ok(MetadataCheck { min_degree_ok, exact_hole: Some(v), sampled_hole: None, hole_ok: v <= meta.hole_bound });
    }
    let mut rng = rng_from(derive(seed, "metadata"));
    let k = pg.k();
    let s = BLOWUP_EXACT_CAP;
    let mut best = 0;
    for _ in 0..10 {
        let picks: Vec<Vec<usize>> = (0..k).map(|i| pg.part(i).choose_multiple(&mut rng, s).copied().collect()).collect();
        let mut index = vec![usize::MAX; pg.vertex_count()];
        for (i, p) in picks.iter().enumerate() {
            for (a, &v) in p.iter().enumerate() {
                index[v] = i * s + a;
            }
        }
        let edges: Vec<(usize, usize)> = pg
            .graph()
            .edges()
            .filter(|&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
            .map(|(a, b)| (index[a], index[b]))
            .collect();
        let sub = PartitionedGraph::contiguous(k, s, edges)?;
        best = best.max(alpha_star_b_exact(&sub, BLOWUP_EXACT_CAP)?.value);
    }
    Ok(MetadataCheck { min_degree_ok, exact_hole: None, sampled_hole: Some(best), hole_ok: best <= meta.hole_bound })
}
