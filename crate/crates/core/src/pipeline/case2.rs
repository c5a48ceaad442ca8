//! Caterpillar case: embed the tree minus the caterpillar interiors into
//! `V_1`, route the central paths through `k′ − 1` layers via a transversal
//! cycle factor of an auxiliary blow-up, and hang the caterpillar leaves in
//! `V_3` with an f-matching.

use std::collections::BTreeMap;

use rand::Rng as _;

use serde::{Deserialize, Serialize};

use super::case1::{embed_core, hang_leaves};
use super::{partition_into, Phase, PhaseLog, PipelineConfig, StepError};
use crate::embed::{max_bipartite_matching, Embedding};
use crate::factor::transversal_factor;
use crate::graph::{pair_min_degree, Graph, PartitionedGraph, VertexSet};
use crate::rng::{derive, derive_index, rng_from, Rng};
use crate::tree::{extract_caterpillars_case2, select_k_prime, Case2Family, Case2Subcase, CaseTag, Tree, TreeClassification};

/// `(2Δ|T_2| + 4Δd)/(d − 2Δ)`: the room `V_1` gets beyond `|T_2|`.
pub fn case2_slack(t2: usize, delta: usize, d: f64) -> Option<f64> {
    let two_delta = 2.0 * delta as f64;
    (d > two_delta).then(|| (two_delta * t2 as f64 + 2.0 * two_delta * d) / (d - two_delta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case2Plan {
    pub family: Case2Family,
    /// Membership in `T_2`: everything except caterpillar interiors and
    /// their leaves.
    pub keep: Vec<bool>,
    pub t2: usize,
    /// `n′(k′ − 1)` interior path vertices.
    pub interior: usize,
    pub leaves: usize,
    pub d: f64,
    pub slack_exact: Option<f64>,
    pub sizes: [usize; 3],
    pub in_regime: bool,
}

impl Case2Plan {
    pub fn new(t: &Tree, cls: &TreeClassification, cfg: &PipelineConfig, n: usize) -> Result<Case2Plan, String> {
        if cls.case_tag != CaseTag::Caterpillars {
            return Err("classification is not the caterpillar case".into());
        }
        let k_prime = select_k_prime(cls.k).map_err(|e| e.to_string())?;
        assert_eq!((k_prime - 2) % 4, 0, "k′ ≡ 2 (mod 4)");
        let family = extract_caterpillars_case2(t, cls, k_prime).map_err(|e| e.to_string())?;
        if family.caterpillars.is_empty() {
            return Err("no caterpillars of length k′".into());
        }
        let mut keep = vec![true; t.vertex_count()];
        let mut leaves = 0;
        for c in &family.caterpillars {
            for &v in &c.central_path[1..k_prime] {
                keep[v] = false;
            }
            for (_, ls) in &c.leaves {
                leaves += ls.len();
                for &l in ls {
                    keep[l] = false;
                }
            }
        }
        let t2 = keep.iter().filter(|&&k| k).count();
        let interior = family.caterpillars.len() * (k_prime - 1);
        if t2 + interior + leaves != n {
            return Err(format!("caterpillar bookkeeping: {t2} + {interior} + {leaves} != {n}"));
        }
        let ladder = cfg.d_ladder();
        let fit = ladder.iter().find_map(|&d| {
            let s = case2_slack(t2, cfg.delta_max, d)?;
            let rounded = (s - 1e-9).ceil() as usize;
            (rounded <= interior).then_some((d, s, rounded))
        });
        let (d, slack_exact, slack, in_regime) = match fit {
            Some((d, s, r)) => (d, Some(s), r, true),
            None => (ladder[0], None, interior / 2, false),
        };
        Ok(Case2Plan { family, keep, t2, interior, leaves, d, slack_exact, sizes: [t2 + slack, interior - slack, leaves], in_regime })
    }

    pub fn k_prime(&self) -> usize {
        self.family.k_prime
    }

    pub fn n_prime(&self) -> usize {
        self.family.caterpillars.len()
    }
}

/// Greedy matching of each vertex in `from` to a distinct free neighbour
/// in `free`, in order.
fn greedy_into(g: &Graph, from: &[usize], free: &mut VertexSet) -> Result<Vec<usize>, usize> {
    from.iter()
        .map(|&u| {
            let w = g.neighbors(u).iter().copied().find(|&w| free.contains(w)).ok_or(u)?;
            free.remove(w);
            Ok(w)
        })
        .collect()
}

/// Layers `X′_1, …, X′_{k′−1}` of `V_2′` with `X′_1[i]` adjacent to the
/// image of `s_i` and `X′_{k′−1}[i]` adjacent to the image of `w_i`.
struct Layers {
    x: Vec<usize>,
    y: Vec<usize>,
    /// `X′_2, …, X′_{k′−2}`.
    middle: Vec<Vec<usize>>,
}

impl Layers {
    /// Host vertex at `pos` of cyclic layer `l` as seen from layer `towards`.
    /// Layer 0 holds the `z_j`, which face layer 1 through `x_j` and the
    /// last layer through `y_j`.
    fn at(&self, l: usize, pos: usize, towards: usize) -> usize {
        match l {
            0 if towards == 1 => self.x[pos],
            0 => self.y[pos],
            _ => self.middle[l - 1][pos],
        }
    }

    fn deg(&self, g: &Graph, l: usize, pos: usize, other: usize) -> usize {
        let a = self.at(l, pos, other);
        (0..self.x.len()).filter(|&q| g.has_edge(a, self.at(other, q, l))).count()
    }

    /// Squared shortfall below `target` of the degrees of layer `l` into
    /// both cyclic neighbours.
    fn deficit(&self, g: &Graph, l: usize, target: usize) -> usize {
        let c = self.middle.len() + 1;
        let short = |d: usize| target.saturating_sub(d).pow(2);
        (0..self.x.len()).map(|p| short(self.deg(g, l, p, (l + 1) % c)) + short(self.deg(g, l, p, (l + c - 1) % c))).sum()
    }

    fn total_deficit(&self, g: &Graph, target: usize) -> usize {
        (0..=self.middle.len()).map(|l| self.deficit(g, l, target)).sum()
    }

    /// Random swaps between middle layers, kept when the deficit does not
    /// grow. Returns the deficit before and after.
    fn balance(&mut self, g: &Graph, target: usize, rounds: usize, rng: &mut Rng) -> (usize, usize) {
        let c = self.middle.len() + 1;
        let n_prime = self.x.len();
        let before = self.total_deficit(g, target);
        let mut now = before;
        for _ in 0..rounds {
            if now == 0 {
                break;
            }
            let a = rng.gen_range(1..c);
            let b = rng.gen_range(1..c);
            if a == b {
                continue;
            }
            let (pa, pb) = (rng.gen_range(0..n_prime), rng.gen_range(0..n_prime));
            let mut touched: Vec<usize> = [a + c - 1, a, a + 1, b + c - 1, b, b + 1].iter().map(|l| l % c).collect();
            touched.sort_unstable();
            touched.dedup();
            let local = |ls: &Layers| touched.iter().map(|&l| ls.deficit(g, l, target)).sum::<usize>();
            let old = local(self);
            let (u, v) = (self.middle[a - 1][pa], self.middle[b - 1][pb]);
            self.middle[a - 1][pa] = v;
            self.middle[b - 1][pb] = u;
            let new = local(self);
            if new <= old {
                now = now + new - old;
            } else {
                self.middle[a - 1][pa] = u;
                self.middle[b - 1][pb] = v;
            }
        }
        (before, now)
    }
}

/// The caterpillar case. Phases: sizing, partition, core-embed, matchings
/// (layer split and the four matchings), factor (auxiliary blow-up),
/// star-matching (skipped for bare caterpillars).
pub fn case2_embed(
    g: &Graph,
    t: &Tree,
    cls: &TreeClassification,
    cfg: &PipelineConfig,
    hole_bound: Option<usize>,
    seed: u64,
    log: &mut PhaseLog,
) -> Result<Embedding, StepError> {
    let n = g.vertex_count();
    let delta = cfg.delta_max as f64;
    let plan = log.run(Phase::Sizing, |rep| {
        let plan = Case2Plan::new(t, cls, cfg, n)?;
        rep.metric("d", plan.d);
        rep.metric("k_prime", plan.k_prime() as f64);
        rep.metric("n_prime", plan.n_prime() as f64);
        rep.metric("t2", plan.t2 as f64);
        for (i, s) in plan.sizes.iter().enumerate() {
            rep.metric(&format!("n{}", i + 1), *s as f64);
        }
        rep.note(format!("{:?} subcase", plan.family.subcase));
        match plan.slack_exact {
            Some(s) => {
                let v1 = plan.t2 as f64 + s;
                let err = v1 - 4.0 * delta * (v1 / (2.0 * plan.d) + 1.0) - plan.t2 as f64;
                rep.metric("room_identity_error", err.abs());
                if err.abs() > 1e-6 {
                    return Err(format!("size identity off by {err}"));
                }
            }
            None => rep.warn(format!(
                "slack (2Δ|T_2| + 4Δd)/(d − 2Δ) exceeds n′(k′ − 1) for every d up to {}; using half of n′(k′ − 1)",
                super::D_LADDER_MAX
            )),
        }
        Ok(plan)
    })?;
    let k_prime = plan.k_prime();
    let n_prime = plan.n_prime();
    let cats = &plan.family.caterpillars;
    let bare = plan.family.subcase == Case2Subcase::Bare;

    let parts = log.run(Phase::Partition, |rep| {
        let all: Vec<usize> = (0..n).collect();
        let sizes: &[usize] = if bare { &plan.sizes[..2] } else { &plan.sizes };
        if bare && plan.sizes[2] != 0 {
            return Err("bare caterpillars left vertices for V_3".into());
        }
        partition_into(g, &all, sizes, cfg.eps / 2.0, derive(seed, "partition"), rep)
    })?;
    let v1 = VertexSet::from_iter(n, parts[0].iter().copied());

    let mut map = log.run(Phase::CoreEmbed, |rep| embed_core(g, t, &plan.keep, &v1, plan.d, cfg, hole_bound, seed, rep))?;

    // The layer split and the auxiliary factor are randomised; a failure in
    // either one is retried on a fresh split.
    let mark = log.phases.len();
    let tries = cfg.layer_retries.max(1);
    for round in 0..tries {
        let last = round + 1 == tries;
        let layers = log.run(Phase::Matchings, |rep| {
            let images = VertexSet::from_iter(n, map.iter().flatten().copied());
            let mut v2p: Vec<usize> = parts[1].clone();
            v2p.extend(parts[0].iter().copied().filter(|&h| !images.contains(h)));
            v2p.sort_unstable();
            if v2p.len() != plan.interior {
                return Err(format!("V_2′ has {} vertices, expected {}", v2p.len(), plan.interior));
            }
            let split = partition_into(g, &v2p, &vec![n_prime; k_prime - 1], cfg.eps / 4.0, derive_index(derive(seed, "layers"), round as u64), rep)?;
            let xs: Vec<VertexSet> = split.iter().map(|p| VertexSet::from_iter(n, p.iter().copied())).collect();
            let s_img: Vec<usize> = cats.iter().map(|c| map[c.central_path[0]].expect("end embedded")).collect();
            let w_img: Vec<usize> = cats.iter().map(|c| map[c.central_path[k_prime]].expect("end embedded")).collect();
            let alpha_n = cfg.alpha * n as f64;
            rep.metric("alpha_n", alpha_n);

            let mut matched = |imgs: &[usize], layer: &VertexSet, tag: &str| -> Result<Vec<Option<usize>>, String> {
                let a = VertexSet::from_iter(n, imgs.iter().copied());
                let m = max_bipartite_matching(g, &a, layer).map_err(|e| e.to_string())?;
                let by: BTreeMap<usize, usize> = m.pairs.iter().copied().collect();
                let defect = n_prime - m.pairs.len();
                rep.metric(&format!("{tag}_defect"), defect as f64);
                if defect as f64 >= alpha_n {
                    rep.warn(format!("{tag} leaves {defect} ends unmatched, not below αn = {alpha_n:.1}"));
                }
                Ok(imgs.iter().map(|h| by.get(h).copied()).collect())
            };
            let m1 = matched(&s_img, &xs[0], "m1")?;
            let m2 = matched(&w_img, &xs[k_prime - 2], "m2")?;

            // M_3 and M_4: the unmatched ends go into X_2.
            let mut free2 = xs[1].clone();
            let s_rest: Vec<usize> = (0..n_prime).filter(|&i| m1[i].is_none()).collect();
            let w_rest: Vec<usize> = (0..n_prime).filter(|&i| m2[i].is_none()).collect();
            let no_room = |u: usize| format!("end image {u} has no free neighbour left in X_2");
            let m3 = greedy_into(g, &s_rest.iter().map(|&i| s_img[i]).collect::<Vec<_>>(), &mut free2).map_err(no_room)?;
            let m4 = greedy_into(g, &w_rest.iter().map(|&i| w_img[i]).collect::<Vec<_>>(), &mut free2).map_err(no_room)?;
            let mut x: Vec<usize> = m1.iter().map(|m| m.unwrap_or(usize::MAX)).collect();
            for (&i, &h) in s_rest.iter().zip(&m3) {
                x[i] = h;
            }
            let mut y: Vec<usize> = m2.iter().map(|m| m.unwrap_or(usize::MAX)).collect();
            for (&i, &h) in w_rest.iter().zip(&m4) {
                y[i] = h;
            }
            let used_x = VertexSet::from_iter(n, x.iter().copied());
            let used_y = VertexSet::from_iter(n, y.iter().copied());
            // X′_2 = (X_2 − V(M_3 ∪ M_4)) ∪ (X_1 − V(M_1)) ∪ (X_{k′−1} − V(M_2)).
            let mut x2: Vec<usize> = free2.iter().collect();
            x2.extend(xs[0].iter().filter(|&h| !used_x.contains(h)));
            x2.extend(xs[k_prime - 2].iter().filter(|&h| !used_y.contains(h)));
            x2.sort_unstable();
            let mut middle = vec![x2];
            middle.extend(split[2..k_prime - 2].iter().cloned());
            let moved = s_rest.len() + w_rest.len();
            rep.metric("moved", moved as f64);
            if middle.iter().any(|l| l.len() != n_prime) {
                return Err("reshuffled layers are unbalanced".into());
            }
            let mut layers = Layers { x, y, middle };
            let parts_h = k_prime - 2;
            let target = (2 * n_prime).div_ceil(parts_h).min(n_prime);
            let rounds = (30 * n_prime * parts_h).min(6000);
            let mut rng = rng_from(derive_index(derive(seed, "balance"), round as u64));
            let (before, after) = layers.balance(g, target, rounds, &mut rng);
            rep.metric("layer_deficit_before", before as f64);
            rep.metric("layer_deficit_after", after as f64);
            Ok(layers)
        });
        let layers = match layers {
            Ok(l) => l,
            Err(_) if !last => {
                log.phases.truncate(mark);
                continue;
            }
            Err(e) => return Err(e),
        };

        let factored = log.run(Phase::Factor, |rep| {
            // Parts: X′_0 = {z_j} (fresh, 0..n′), then X′_2, …, X′_{k′−2}.
            let parts_h = k_prime - 2;
            let host_of: Vec<usize> = layers.middle.iter().flatten().copied().collect();
            let local = |layer: usize, pos: usize| layer * n_prime + pos;
            let mut edges = Vec::new();
            for j in 0..n_prime {
                for (p, &h) in layers.middle[0].iter().enumerate() {
                    if g.has_edge(layers.x[j], h) {
                        edges.push((j, local(1, p)));
                    }
                }
                for (p, &h) in layers.middle[parts_h - 2].iter().enumerate() {
                    if g.has_edge(layers.y[j], h) {
                        edges.push((j, local(parts_h - 1, p)));
                    }
                }
            }
            for l in 0..parts_h - 2 {
                for (p, &a) in layers.middle[l].iter().enumerate() {
                    for (q, &b) in layers.middle[l + 1].iter().enumerate() {
                        if g.has_edge(a, b) {
                            edges.push((local(l + 1, p), local(l + 2, q)));
                        }
                    }
                }
            }
            let h = Graph::from_edges(parts_h * n_prime, edges).map_err(|e| e.to_string())?;
            let hparts: Vec<Vec<usize>> = (0..parts_h).map(|l| (0..n_prime).map(|p| local(l, p)).collect()).collect();
            let pg = PartitionedGraph::new(h, hparts).map_err(|e| e.to_string())?;
            let min_pair = pair_min_degree(&pg);
            rep.metric("parts", parts_h as f64);
            rep.metric("part_size", n_prime as f64);
            rep.metric("pair_min_degree", min_pair as f64);
            rep.metric("factor_threshold", 2.0 * n_prime as f64 / parts_h as f64);
            if (min_pair as f64) <= 2.0 * n_prime as f64 / parts_h as f64 {
                rep.warn(format!("δ̄(H) = {min_pair} is not above 2n′/(k′ − 2)"));
            }
            let run = transversal_factor(&pg, &cfg.factor, derive_index(derive(seed, "factor"), round as u64)).map_err(|e| e.to_string())?;
            rep.note(format!("route {:?}", run.route));
            rep.notes.extend(run.notes.iter().cloned());
            for c in &run.factor {
                let j = c.vertices[0];
                let cat = &cats[j];
                let p = &cat.central_path;
                map[p[1]] = Some(layers.x[j]);
                map[p[k_prime - 1]] = Some(layers.y[j]);
                for l in 1..parts_h {
                    map[p[l + 1]] = Some(host_of[c.vertices[l] - n_prime]);
                }
            }
            Ok(())
        });
        match factored {
            Ok(()) => {
                for p in &mut log.phases[mark..] {
                    p.retries += round;
                }
                break;
            }
            Err(_) if !last => log.phases.truncate(mark),
            Err(e) => return Err(e),
        }
    }

    if bare {
        log.skip(Phase::StarMatching, "bare caterpillars have no leaves");
    } else {
        log.run(Phase::StarMatching, |rep| {
            let v3 = VertexSet::from_iter(n, parts[2].iter().copied());
            let mut f = BTreeMap::new();
            for c in cats {
                for (b, ls) in &c.leaves {
                    f.insert(map[*b].expect("branch vertex embedded"), ls.len());
                }
            }
            rep.metric("m", cfg.alpha * n as f64);
            let hung = hang_leaves(g, &f, &v3, rep)?;
            for c in cats {
                for (b, ls) in &c.leaves {
                    for (&l, &h) in ls.iter().zip(&hung[&map[*b].expect("branch vertex embedded")]) {
                        map[l] = Some(h);
                    }
                }
            }
            Ok(())
        })?;
    }
    Ok(Embedding { map, host_size: n })
}
