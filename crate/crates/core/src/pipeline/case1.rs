//! Star case: embed the tree minus a family of pendant stars into `V_1`,
//! match the star centres into `V_2`, place the few unmatched stars in
//! `V_3` greedily, then hang the remaining leaves with an f-matching.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{partition_into, subforest, Phase, PhaseLog, PhaseReport, PipelineConfig, StepError};
use crate::embed::{embed_forest, f_matching, max_bipartite_matching, EmbedError, Embedding};
use crate::graph::{Graph, VertexSet};
use crate::rng::derive;
use crate::tree::{CaseTag, PendantStar, Tree, TreeClassification};

/// `n_1 = (d|T_1| + 4Δd)/(d − 2Δ)` rounded up, if it fits next to `n_2`.
pub fn case1_sizes(t1: usize, n2: usize, n: usize, delta: usize, d: f64) -> Option<(f64, usize)> {
    let two_delta = 2.0 * delta as f64;
    if d <= two_delta {
        return None;
    }
    let exact = (d * t1 as f64 + 2.0 * two_delta * d) / (d - two_delta);
    let n1 = (exact - 1e-9).ceil() as usize;
    (n1 + n2 <= n).then_some((exact, n1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case1Plan {
    /// Vertex-disjoint pendant stars, roots included and distinct.
    pub stars: Vec<PendantStar>,
    /// Membership in `T_1`: everything except star centres and leaves.
    pub keep: Vec<bool>,
    pub t1: usize,
    pub d: f64,
    /// Unrounded `n_1` when the formula fits, otherwise `None`.
    pub n1_exact: Option<f64>,
    pub sizes: [usize; 3],
    /// Whether some `d` on the ladder makes the size formula fit.
    pub in_regime: bool,
}

impl Case1Plan {
    pub fn new(t: &Tree, cls: &TreeClassification, cfg: &PipelineConfig, n: usize) -> Result<Case1Plan, String> {
        if cls.case_tag != CaseTag::PendantStars {
            return Err("classification is not the star case".into());
        }
        let mut used = vec![false; t.vertex_count()];
        let mut stars = Vec::new();
        for s in &cls.stars {
            let Some(root) = s.root else { continue };
            if used[root] || used[s.center] {
                continue;
            }
            used[root] = true;
            used[s.center] = true;
            for &l in &s.leaves {
                used[l] = true;
            }
            stars.push(s.clone());
        }
        if stars.is_empty() {
            return Err("no pendant star has a root".into());
        }
        let mut keep = vec![true; t.vertex_count()];
        for s in &stars {
            keep[s.center] = false;
            for &l in &s.leaves {
                keep[l] = false;
            }
        }
        let t1 = keep.iter().filter(|&&k| k).count();
        let n2 = stars.len();
        let ladder = cfg.d_ladder();
        let fit = ladder.iter().find_map(|&d| case1_sizes(t1, n2, n, cfg.delta_max, d).map(|(e, n1)| (d, e, n1)));
        let (d, n1_exact, n1, in_regime) = match fit {
            Some((d, e, n1)) => (d, Some(e), n1, true),
            None => (ladder[0], None, t1 + (n - n2 - t1) / 2, false),
        };
        Ok(Case1Plan { stars, keep, t1, d, n1_exact, sizes: [n1, n2, n - n1 - n2], in_regime })
    }
}

fn free_degree(g: &Graph, v: usize, free: &VertexSet) -> usize {
    g.degree_into(v, free) - usize::from(free.contains(v))
}

/// Places star `s` in `free` with its centre next to `root_img`: the centre
/// with the most free neighbours, the leaves with the fewest.
fn place_star(g: &Graph, root_img: usize, leaves: usize, free: &mut VertexSet) -> Option<(usize, Vec<usize>)> {
    let centre = g
        .neighbors(root_img)
        .iter()
        .copied()
        .filter(|&c| free.contains(c))
        .map(|c| (free_degree(g, c, free), c))
        .filter(|&(deg, _)| deg >= leaves)
        .max_by_key(|&(deg, c)| (deg, std::cmp::Reverse(c)))?
        .1;
    free.remove(centre);
    let mut cands: Vec<(usize, usize)> =
        g.neighbors(centre).iter().copied().filter(|&w| free.contains(w)).map(|w| (free_degree(g, w, free), w)).collect();
    cands.sort_unstable();
    let chosen: Vec<usize> = cands.into_iter().take(leaves).map(|(_, w)| w).collect();
    for &w in &chosen {
        free.remove(w);
    }
    Some((centre, chosen))
}

fn check_expander_on(g: &Graph, v1: &VertexSet, d: f64, hole_bound: Option<usize>, seed: u64, rep: &mut PhaseReport) {
    use crate::embed::{check_expander, ExpanderMode, HeuristicCheck};
    let (h, _) = crate::graph::induced_subgraph(g, v1);
    let heur = HeuristicCheck { alpha_bound: hole_bound.map(|b| b + 1), seed, ..HeuristicCheck::default() };
    match check_expander(&h, d, ExpanderMode::Heuristic, heur) {
        Ok(cert) => {
            rep.metric("expander_checked_sets", cert.checked_sets as f64);
            if let Some(v) = cert.violation {
                rep.warn(format!("G[V_1] is not an (n_1, {d})-expander: {v:?}"));
            }
        }
        Err(e) => rep.warn(format!("expander check failed to run: {e}")),
    }
}

/// Embeds the forest `keep` of `t` into `g[v1]`; returns tree → host.
pub(crate) fn embed_core(
    g: &Graph,
    t: &Tree,
    keep: &[bool],
    v1: &VertexSet,
    d: f64,
    cfg: &PipelineConfig,
    hole_bound: Option<usize>,
    seed: u64,
    rep: &mut PhaseReport,
) -> Result<Vec<Option<usize>>, String> {
    if cfg.expander_check {
        check_expander_on(g, v1, d, hole_bound, derive(seed, "expander"), rep);
    }
    let (pattern, to_original) = subforest(t, keep);
    rep.metric("pattern", pattern.vertex_count() as f64);
    rep.metric("host_part", v1.len() as f64);
    let emb = embed_forest(g, v1, &pattern, &[], &cfg.embed_config(derive(seed, "core"))).map_err(|e| e.to_string())?;
    let mut map = vec![None; t.vertex_count()];
    for (i, &v) in to_original.iter().enumerate() {
        map[v] = emb.map[i];
    }
    Ok(map)
}

/// Hangs `f(u)` leaves on every centre image `u` inside `targets`; returns
/// the chosen leaves per centre.
pub(crate) fn hang_leaves(
    g: &Graph,
    f: &BTreeMap<usize, usize>,
    targets: &VertexSet,
    rep: &mut PhaseReport,
) -> Result<BTreeMap<usize, Vec<usize>>, String> {
    let centres = VertexSet::from_iter(g.vertex_count(), f.keys().copied());
    rep.metric("centres", centres.len() as f64);
    rep.metric("targets", targets.len() as f64);
    match f_matching(g, &centres, targets, f) {
        Ok(family) => {
            family.verify(g, targets, f)?;
            Ok(family.stars)
        }
        Err(EmbedError::Infeasible(hv)) => {
            rep.metric("hall_witness", hv.w_prime.len() as f64);
            Err(format!(
                "no f-matching: {} targets see centres of total demand {} but need {}",
                hv.w_prime.len(),
                hv.neighbor_capacity,
                hv.w_prime.len()
            ))
        }
        Err(e) => Err(e.to_string()),
    }
}

/// The star case. Phases: sizing, partition, core-embed, matchings (centres
/// into `V_2`, leftovers into `V_3`), star-matching.
pub fn case1_embed(
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
        let plan = Case1Plan::new(t, cls, cfg, n)?;
        rep.metric("d", plan.d);
        rep.metric("t1", plan.t1 as f64);
        rep.metric("stars", plan.stars.len() as f64);
        for (i, s) in plan.sizes.iter().enumerate() {
            rep.metric(&format!("n{}", i + 1), *s as f64);
        }
        match plan.n1_exact {
            Some(e) => {
                // |T_1| = n_1 − 4Δ(n_1/2d + 1) for the unrounded n_1.
                let err = e - 4.0 * delta * (e / (2.0 * plan.d) + 1.0) - plan.t1 as f64;
                rep.metric("room_identity_error", err.abs());
                if err.abs() > 1e-6 {
                    return Err(format!("size identity off by {err}"));
                }
            }
            None => rep.warn(format!(
                "n_1 = (d|T_1| + 4Δd)/(d − 2Δ) exceeds n − n_2 for every d up to {}; using n_1 = |T_1| + half the slack",
                super::D_LADDER_MAX
            )),
        }
        Ok(plan)
    })?;
    let [n1, n2, _] = plan.sizes;
    let parts = log.run(Phase::Partition, |rep| {
        let all: Vec<usize> = (0..n).collect();
        partition_into(g, &all, &plan.sizes, cfg.eps / 2.0, derive(seed, "partition"), rep)
    })?;
    let sets: Vec<VertexSet> = parts.iter().map(|p| VertexSet::from_iter(n, p.iter().copied())).collect();
    debug_assert_eq!((sets[0].len(), sets[1].len()), (n1, n2));

    let mut map = log.run(Phase::CoreEmbed, |rep| embed_core(g, t, &plan.keep, &sets[0], plan.d, cfg, hole_bound, seed, rep))?;

    // Centres: a maximum matching from the root images into V_2, the rest
    // greedily into V_3.
    let matched = log.run(Phase::Matchings, |rep| {
        let root_img: Vec<usize> = plan.stars.iter().map(|s| map[s.root.expect("selected stars have roots")].expect("root embedded")).collect();
        let l1 = VertexSet::from_iter(n, root_img.iter().copied());
        let m = max_bipartite_matching(g, &l1, &sets[1]).map_err(|e| e.to_string())?;
        let mut by_root = BTreeMap::new();
        for (a, b) in &m.pairs {
            by_root.insert(*a, *b);
        }
        let defect = n2 - m.pairs.len();
        let alpha_n = cfg.alpha * n as f64;
        rep.metric("matching", m.pairs.len() as f64);
        rep.metric("matching_defect", defect as f64);
        rep.metric("alpha_n", alpha_n);
        if defect as f64 >= alpha_n {
            rep.warn(format!("matching defect {defect} is not below αn = {alpha_n:.1}"));
        }
        let mut free3 = sets[2].clone();
        let mut matched = Vec::new();
        for (i, s) in plan.stars.iter().enumerate() {
            match by_root.get(&root_img[i]) {
                Some(&c) => {
                    map[s.center] = Some(c);
                    matched.push(i);
                }
                None => {
                    let (c, ls) = place_star(g, root_img[i], s.leaves.len(), &mut free3)
                        .ok_or_else(|| format!("star at tree vertex {} does not fit in V_3", s.center))?;
                    map[s.center] = Some(c);
                    for (&l, h) in s.leaves.iter().zip(ls) {
                        map[l] = Some(h);
                    }
                }
            }
        }
        rep.metric("greedy_stars", (plan.stars.len() - matched.len()) as f64);
        Ok(matched)
    })?;

    log.run(Phase::StarMatching, |rep| {
        let mut targets = VertexSet::full(n);
        for h in map.iter().flatten() {
            targets.remove(*h);
        }
        let f: BTreeMap<usize, usize> =
            matched.iter().map(|&i| (map[plan.stars[i].center].expect("matched centre"), plan.stars[i].leaves.len())).collect();
        rep.metric("m", 2.0 * cfg.alpha * n as f64);
        let hung = hang_leaves(g, &f, &targets, rep)?;
        for &i in &matched {
            let s = &plan.stars[i];
            let imgs = &hung[&map[s.center].expect("matched centre")];
            for (&l, &h) in s.leaves.iter().zip(imgs) {
                map[l] = Some(h);
            }
        }
        Ok(())
    })?;
    Ok(Embedding { map, host_size: n })
}
