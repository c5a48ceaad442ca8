//! Spanning-tree embedding end to end: pre-flight checks on the host,
//! dispatch on the tree's structure, the two constructive cases, and an
//! independent verification of the result.

mod bench;
mod case1;
mod case2;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{Embedding, TreeEmbedConfig};
use crate::factor::FactorParams;
use crate::gen::best_effort_partition;
use crate::graph::Graph;
use crate::hole::alpha_star_lower_bound;
use crate::rng::{derive, derive_index};
use crate::tree::{classify, classify_caterpillars, find_pendant_stars, CaseTag, Tree, TreeClassification, TreeError};

pub use bench::{bench, bench_csv, BenchPlan, BenchRow};
pub use case1::{case1_embed, case1_sizes, Case1Plan};
pub use case2::{case2_embed, case2_slack, Case2Plan};

/// Largest rung tried by the automatic choice of `d`.
pub const D_LADDER_MAX: f64 = 65536.0;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Gen(#[from] crate::gen::GenError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub eps: f64,
    pub delta_max: usize,
    /// Expansion parameter. `None` takes the first rung of
    /// `max(2Δ, 16), 2·max(2Δ, 16), …` on which the part sizes fit.
    pub d: Option<f64>,
    /// Caterpillar length for the classification. `None` means `⌈48/ε⌉`.
    pub k: Option<usize>,
    /// Hole threshold: the host is rejected when a `(t,t)`-hole with
    /// `t ≥ αn` is found.
    pub alpha: f64,
    /// Full attempts per case, each with a fresh seed.
    pub attempts: usize,
    /// Greedy restarts for the pre-flight hole search.
    pub hole_budget: usize,
    pub embed_budget: usize,
    pub embed_restarts: usize,
    /// Fresh layer splits tried before the caterpillar factor step gives up.
    pub layer_retries: usize,
    /// Run the heuristic expander check on `G[V_1]` before embedding.
    pub expander_check: bool,
    /// Skip the classification and use this case.
    pub force_case: Option<CaseTag>,
    /// Use the caterpillar case when the star case does not fit or fails.
    pub case2_fallback: bool,
    pub factor: FactorParams,
    /// Record wall-clock phase timings. Off by default because timings
    /// break byte-identical reports.
    pub timings: bool,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            eps: 0.25,
            delta_max: 4,
            d: None,
            k: None,
            alpha: 0.2,
            attempts: 3,
            hole_budget: 8,
            embed_budget: 50,
            embed_restarts: 3,
            layer_retries: 8,
            expander_check: true,
            force_case: None,
            case2_fallback: true,
            factor: FactorParams::default(),
            timings: false,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn k(&self) -> usize {
        self.k.unwrap_or_else(|| (48.0 / self.eps - 1e-9).ceil() as usize)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.delta_max < 2 {
            return bad(format!("delta_max must be at least 2, got {}", self.delta_max));
        }
        if let Some(d) = self.d {
            if !(d >= 2.0 * self.delta_max as f64) {
                return bad(format!("d = {d} is below 2·delta_max = {}", 2 * self.delta_max));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.k() < 3 {
            return bad(format!("k must be at least 3, got {}", self.k()));
        }
        if self.attempts == 0 || self.hole_budget == 0 {
            return bad("attempts and hole_budget must be positive".into());
        }
        Ok(())
    }

    /// Candidate values of `d`: the fixed one, or the doubling ladder.
    pub fn d_ladder(&self) -> Vec<f64> {
        if let Some(d) = self.d {
            return vec![d];
        }
        let mut d = (2 * self.delta_max).max(16) as f64;
        let mut out = Vec::new();
        while d <= D_LADDER_MAX {
            out.push(d);
            d *= 2.0;
        }
        out
    }

    pub(crate) fn embed_config(&self, seed: u64) -> TreeEmbedConfig {
        TreeEmbedConfig { budget_factor: self.embed_budget, restarts: self.embed_restarts, seed, strict_room: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Preflight,
    Classify,
    Sizing,
    Partition,
    CoreEmbed,
    Matchings,
    Factor,
    StarMatching,
    Verify,
}

impl Phase {
    pub const ALL: [Phase; 9] = [
        Phase::Preflight,
        Phase::Classify,
        Phase::Sizing,
        Phase::Partition,
        Phase::CoreEmbed,
        Phase::Matchings,
        Phase::Factor,
        Phase::StarMatching,
        Phase::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Preflight => "preflight",
            Phase::Classify => "classify",
            Phase::Sizing => "sizing",
            Phase::Partition => "partition",
            Phase::CoreEmbed => "core-embed",
            Phase::Matchings => "matchings",
            Phase::Factor => "factor",
            Phase::StarMatching => "star-matching",
            Phase::Verify => "verify",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseStatus {
    Ok,
    /// Completed, but some inequality of the proof regime failed.
    Warn,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub name: Phase,
    pub status: PhaseStatus,
    pub retries: usize,
    pub ms: Option<u64>,
    pub notes: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
}

impl PhaseReport {
    fn new(name: Phase) -> Self {
        PhaseReport { name, status: PhaseStatus::Ok, retries: 0, ms: None, notes: Vec::new(), metrics: BTreeMap::new() }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Marks the phase as outside the proof regime.
    pub fn warn(&mut self, msg: impl Into<String>) {
        if self.status == PhaseStatus::Ok {
            self.status = PhaseStatus::Warn;
        }
        self.notes.push(format!("warning: {}", msg.into()));
    }

    pub fn metric(&mut self, key: &str, value: impl Into<f64>) {
        self.metrics.insert(key.to_string(), value.into());
    }
}

/// A failed step of one of the cases.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{phase}: {reason}")]
pub struct StepError {
    pub phase: Phase,
    pub reason: String,
}

/// Collects phase reports and times them when asked to.
pub struct PhaseLog {
    timings: bool,
    pub phases: Vec<PhaseReport>,
}

impl PhaseLog {
    pub fn new(timings: bool) -> Self {
        PhaseLog { timings, phases: Vec::new() }
    }

    pub fn run<T>(&mut self, phase: Phase, f: impl FnOnce(&mut PhaseReport) -> Result<T, String>) -> Result<T, StepError> {
        let mut rep = PhaseReport::new(phase);
        let start = self.timings.then(Instant::now);
        let out = f(&mut rep);
        rep.ms = start.map(|s| s.elapsed().as_millis() as u64);
        let out = out.map_err(|reason| {
            rep.status = PhaseStatus::Failed;
            rep.notes.push(reason.clone());
            StepError { phase, reason }
        });
        self.phases.push(rep);
        out
    }

    pub fn skip(&mut self, phase: Phase, why: &str) {
        let mut rep = PhaseReport::new(phase);
        rep.status = PhaseStatus::Skipped;
        rep.note(why);
        self.phases.push(rep);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Violation {
    SizeMismatch { pattern: usize, host: usize, expected_pattern: usize, expected_host: usize },
    Unmapped { vertex: usize },
    OutOfRange { vertex: usize, image: usize },
    NotInjective { first: usize, second: usize, image: usize },
    MissingEdge { u: usize, v: usize, image_u: usize, image_v: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub mapped: usize,
    pub total: usize,
    /// The first violation found, if any.
    pub violation: Option<Violation>,
}

/// Checks that `emb` is a spanning embedding of `t` into `g`: every tree
/// vertex mapped, images distinct, every tree edge a host edge.
pub fn verify_embedding(g: &Graph, t: &Tree, emb: &Embedding) -> Verdict {
    let n = t.vertex_count();
    let mapped = emb.mapped_count();
    let fail = |v: Violation| Verdict { passed: false, mapped, total: n, violation: Some(v) };
    if emb.map.len() != n || emb.host_size != g.vertex_count() {
        return fail(Violation::SizeMismatch {
            pattern: emb.map.len(),
            host: emb.host_size,
            expected_pattern: n,
            expected_host: g.vertex_count(),
        });
    }
    let mut owner = vec![usize::MAX; g.vertex_count()];
    for (v, m) in emb.map.iter().enumerate() {
        let Some(h) = *m else {
            return fail(Violation::Unmapped { vertex: v });
        };
        if h >= g.vertex_count() {
            return fail(Violation::OutOfRange { vertex: v, image: h });
        }
        if owner[h] != usize::MAX {
            return fail(Violation::NotInjective { first: owner[h], second: v, image: h });
        }
        owner[h] = v;
    }
    for (u, v) in t.edges() {
        let (a, b) = (emb.map[u].expect("checked"), emb.map[v].expect("checked"));
        if !g.has_edge(a, b) {
            return fail(Violation::MissingEdge { u, v, image_u: a, image_v: b });
        }
    }
    Verdict { passed: true, mapped, total: n, violation: None }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    Success,
    /// A hypothesis of the theorem fails for this host or tree.
    Rejected { reason: String },
    Failed { phase: Phase, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub case: CaseTag,
    pub seed: u64,
    pub failed: Option<StepError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub case: Option<CaseTag>,
    /// Pre-flight and classification, then the phases of the last attempt.
    pub phases: Vec<PhaseReport>,
    pub attempts: Vec<AttemptRecord>,
    pub embedding: Option<Embedding>,
    pub verdict: Option<Verdict>,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
    pub seed: u64,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    /// The phase a failed run stopped in.
    pub fn failed_phase(&self) -> Option<Phase> {
        match &self.outcome {
            Outcome::Failed { phase, .. } => Some(*phase),
            Outcome::Rejected { .. } => Some(Phase::Preflight),
            Outcome::Success => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn finish(mut self) -> Self {
        self.warnings =
            self.phases.iter().flat_map(|p| p.notes.iter().filter(|n| n.starts_with("warning: ")).map(move |n| format!("{}: {}", p.name, &n[9..]))).collect();
        self
    }
}

/// Hypothesis checks that need no search beyond a greedy hole hunt.
fn preflight(g: &Graph, t: &Tree, cfg: &PipelineConfig, hole_bound: Option<usize>, rep: &mut PhaseReport) -> Result<(), String> {
    let n = g.vertex_count();
    let need = (cfg.eps * n as f64 - 1e-9).ceil() as usize;
    rep.metric("n", n as f64);
    rep.metric("min_degree", g.min_degree() as f64);
    rep.metric("eps_n", cfg.eps * n as f64);
    if g.min_degree() < need {
        return Err(format!("minimum degree {} is below εn = {:.1}", g.min_degree(), cfg.eps * n as f64));
    }
    if t.max_degree() > cfg.delta_max {
        return Err(format!("tree has maximum degree {} above Δ = {}", t.max_degree(), cfg.delta_max));
    }
    let alpha_n = cfg.alpha * n as f64;
    rep.metric("alpha_n", alpha_n);
    let lb = alpha_star_lower_bound(g, cfg.hole_budget, derive(cfg.seed, "preflight")).map_err(|e| e.to_string())?;
    rep.metric("hole_lower_bound", lb.value as f64);
    if lb.value as f64 >= alpha_n {
        return Err(format!("found a ({0},{0})-bipartite hole, at least αn = {alpha_n:.1}", lb.value));
    }
    match hole_bound {
        Some(b) => {
            rep.metric("hole_bound", b as f64);
            if b as f64 >= alpha_n {
                rep.warn(format!("supplied hole bound {b} does not certify α* < αn = {alpha_n:.1}"));
            }
        }
        None => rep.note("no hole upper bound supplied; α* < αn is not certified"),
    }
    Ok(())
}

fn classify_for(t: &Tree, cfg: &PipelineConfig, rep: &mut PhaseReport) -> Result<TreeClassification, String> {
    let k = cfg.k();
    rep.metric("k", k as f64);
    let cls = match cfg.force_case {
        None => classify(t, k, cfg.delta_max),
        Some(CaseTag::Caterpillars) => classify_caterpillars(t, k, cfg.delta_max),
        Some(CaseTag::PendantStars) => find_pendant_stars(t).map(|stars| TreeClassification {
            case_tag: CaseTag::PendantStars,
            stars,
            caterpillars: vec![],
            k,
            delta_max: cfg.delta_max,
        }),
    }
    .map_err(|e| e.to_string())?;
    rep.metric("structures", cls.count() as f64);
    rep.note(format!("{:?} with {} structures", cls.case_tag, cls.count()));
    Ok(cls)
}

fn run_case(
    g: &Graph,
    t: &Tree,
    cls: &TreeClassification,
    cfg: &PipelineConfig,
    hole_bound: Option<usize>,
    seed: u64,
    log: &mut PhaseLog,
) -> Result<Embedding, StepError> {
    match cls.case_tag {
        CaseTag::PendantStars => case1_embed(g, t, cls, cfg, hole_bound, seed, log),
        CaseTag::Caterpillars => case2_embed(g, t, cls, cfg, hole_bound, seed, log),
    }
}

/// Embeds the spanning tree `t` into `g`. Hypothesis violations are
/// reported as `Rejected` before any search; a `Success` outcome is only
/// produced after [`verify_embedding`] passes. `hole_bound` is an upper
/// bound on `α*(g)` when one is known (for example from generator metadata).
pub fn embed_spanning_tree(g: &Graph, t: &Tree, cfg: &PipelineConfig, hole_bound: Option<usize>) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    if t.vertex_count() != g.vertex_count() {
        return Err(PipelineError::BadInput(format!(
            "tree has {} vertices, host has {}",
            t.vertex_count(),
            g.vertex_count()
        )));
    }
    let mut report = RunReport {
        outcome: Outcome::Success,
        case: None,
        phases: Vec::new(),
        attempts: Vec::new(),
        embedding: None,
        verdict: None,
        warnings: Vec::new(),
        config: cfg.clone(),
        seed: cfg.seed,
    };
    let mut head = PhaseLog::new(cfg.timings);
    if let Err(e) = head.run(Phase::Preflight, |rep| preflight(g, t, cfg, hole_bound, rep)) {
        report.phases = head.phases;
        report.outcome = Outcome::Rejected { reason: e.reason };
        return Ok(report.finish());
    }
    let primary = match head.run(Phase::Classify, |rep| classify_for(t, cfg, rep)) {
        Ok(c) => c,
        Err(e) => {
            report.phases = head.phases;
            report.outcome = Outcome::Failed { phase: e.phase, reason: e.reason };
            return Ok(report.finish());
        }
    };

    // The star case goes first unless its sizes only fit outside the proof
    // regime and the caterpillar case is available.
    let mut plan = vec![primary.clone()];
    if primary.case_tag == CaseTag::PendantStars && cfg.case2_fallback && cfg.force_case.is_none() {
        if let Ok(alt) = classify_caterpillars(t, cfg.k(), cfg.delta_max) {
            let fits = Case1Plan::new(t, &primary, cfg, g.vertex_count()).is_ok_and(|p| p.in_regime);
            if fits {
                plan.push(alt);
            } else {
                head.phases.last_mut().expect("classify ran").note("star-case sizes do not fit; using caterpillars first");
                plan.insert(0, alt);
            }
        }
    }

    let attempt_root = derive(cfg.seed, "attempt");
    let mut last_log = None;
    for cls in &plan {
        for _ in 0..cfg.attempts {
            let seed = derive_index(attempt_root, report.attempts.len() as u64);
            let mut log = PhaseLog::new(cfg.timings);
            let res = run_case(g, t, cls, cfg, hole_bound, seed, &mut log);
            let emb = match res {
                Ok(emb) => emb,
                Err(e) => {
                    report.attempts.push(AttemptRecord { case: cls.case_tag, seed, failed: Some(e) });
                    last_log = Some((cls.case_tag, log));
                    continue;
                }
            };
            let verdict = verify_embedding(g, t, &emb);
            let _ = log.run(Phase::Verify, |rep| {
                rep.metric("mapped", verdict.mapped as f64);
                match &verdict.violation {
                    None => Ok(()),
                    Some(v) => Err(format!("{v:?}")),
                }
            });
            report.attempts.push(AttemptRecord {
                case: cls.case_tag,
                seed,
                failed: (!verdict.passed).then(|| StepError { phase: Phase::Verify, reason: format!("{:?}", verdict.violation) }),
            });
            report.case = Some(cls.case_tag);
            report.phases = head.phases.iter().cloned().chain(log.phases).collect();
            report.outcome = if verdict.passed {
                Outcome::Success
            } else {
                Outcome::Failed { phase: Phase::Verify, reason: format!("{:?}", verdict.violation) }
            };
            report.embedding = Some(emb);
            report.verdict = Some(verdict);
            // A verification failure is a bug, not bad luck: stop here.
            return Ok(report.finish());
        }
    }
    let (case, log) = last_log.expect("at least one attempt ran");
    let last = report.attempts.last().and_then(|a| a.failed.clone()).expect("last attempt failed");
    report.case = Some(case);
    report.phases = head.phases.into_iter().chain(log.phases).collect();
    report.outcome = Outcome::Failed { phase: last.phase, reason: last.reason };
    Ok(report.finish())
}

/// Random split of `ground` into parts of the given sizes, aiming for
/// `d_{V_i}(v) ≥ min_frac·|V_i|` for every vertex. When 100 samples all
/// miss the target, the best one is used and the phase is marked.
pub(crate) fn partition_into(
    g: &Graph,
    ground: &[usize],
    sizes: &[usize],
    min_frac: f64,
    seed: u64,
    rep: &mut PhaseReport,
) -> Result<Vec<Vec<usize>>, String> {
    let p = best_effort_partition(g, ground, sizes, min_frac, seed).map_err(|e| e.to_string())?;
    rep.retries += p.retries;
    rep.metric("min_ratio", p.min_ratio_permille as f64 / 1000.0);
    if p.violations > 0 {
        rep.metric("degree_violations", p.violations as f64);
        rep.warn(format!("{} (vertex, part) pairs stay below {min_frac:.3}·|part| after {} samples", p.violations, p.retries));
    }
    Ok(p.parts)
}

/// Relabels the subforest of `t` induced by `keep` to `0..|keep|`.
pub(crate) fn subforest(t: &Tree, keep: &[bool]) -> (Graph, Vec<usize>) {
    let to_original: Vec<usize> = (0..t.vertex_count()).filter(|&v| keep[v]).collect();
    let mut local = vec![usize::MAX; t.vertex_count()];
    for (i, &v) in to_original.iter().enumerate() {
        local[v] = i;
    }
    let edges: Vec<(usize, usize)> = t.edges().filter(|&(u, v)| keep[u] && keep[v]).map(|(u, v)| (local[u], local[v])).collect();
    let g = Graph::from_edges(to_original.len(), edges).expect("subforest edges are valid");
    (g, to_original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_low_hole_graph, gen_tree, TreeProfile};

    fn path(n: usize) -> Tree {
        Tree::from_parents(&(0..n - 1).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_embedding_verifies() {
        let t = gen_tree(30, 4, TreeProfile::Random, 1).unwrap();
        let emb = Embedding { map: (0..30).map(Some).collect(), host_size: 30 };
        let v = verify_embedding(t.graph(), &t, &emb);
        assert!(v.passed, "{v:?}");
        assert_eq!(v.mapped, 30);
    }

    #[test]
    fn swapped_images_stay_injective_but_lose_an_edge() {
        let t = path(5);
        let mut map: Vec<Option<usize>> = (0..5).map(Some).collect();
        map.swap(0, 2);
        let v = verify_embedding(t.graph(), &t, &Embedding { map, host_size: 5 });
        assert!(!v.passed);
        assert!(matches!(v.violation, Some(Violation::MissingEdge { .. })));
    }

    #[test]
    fn verification_reports_first_violation() {
        let t = path(4);
        let g = Graph::complete(4);
        let v = verify_embedding(&g, &t, &Embedding { map: vec![Some(0), Some(0), Some(1), Some(2)], host_size: 4 });
        assert_eq!(v.violation, Some(Violation::NotInjective { first: 0, second: 1, image: 0 }));
        let v = verify_embedding(&g, &t, &Embedding { map: vec![Some(0), None, Some(1), Some(2)], host_size: 4 });
        assert_eq!(v.violation, Some(Violation::Unmapped { vertex: 1 }));
        let v = verify_embedding(&g, &t, &Embedding { map: vec![Some(0); 3], host_size: 4 });
        assert!(matches!(v.violation, Some(Violation::SizeMismatch { .. })));
    }

    #[test]
    fn config_defaults_and_ladder() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.k(), 192);
        assert_eq!(PipelineConfig { eps: 0.5, ..cfg.clone() }.k(), 96);
        let ladder = cfg.d_ladder();
        assert_eq!(ladder[..3], [16.0, 32.0, 64.0]);
        assert_eq!(PipelineConfig { delta_max: 10, ..cfg.clone() }.d_ladder()[0], 20.0);
        assert!(PipelineConfig { d: Some(6.0), ..cfg.clone() }.validate().is_err());
        assert!(PipelineConfig { eps: 0.0, ..cfg }.validate().is_err());
    }

    #[test]
    fn two_cliques_are_rejected_before_search() {
        let n = 60;
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| (a < 30) == (b < 30));
        let g = Graph::from_edges(n, edges).unwrap();
        let t = path(n);
        let cfg = PipelineConfig { eps: 0.25, k: Some(12), ..PipelineConfig::default() };
        let r = embed_spanning_tree(&g, &t, &cfg, None).unwrap();
        assert!(matches!(r.outcome, Outcome::Rejected { .. }), "{:?}", r.outcome);
        assert_eq!(r.phases.len(), 1);
        assert_eq!(r.failed_phase(), Some(Phase::Preflight));
    }

    #[test]
    fn low_degree_host_is_rejected() {
        let g = path(40).graph().clone();
        let r = embed_spanning_tree(&g, &path(40), &PipelineConfig::default(), None).unwrap();
        assert!(matches!(r.outcome, Outcome::Rejected { ref reason } if reason.contains("minimum degree")));
    }

    #[test]
    fn size_mismatch_is_an_input_error() {
        let (g, _) = gen_low_hole_graph(50, 0.25, 0.15, 1).unwrap();
        assert!(matches!(embed_spanning_tree(&g, &path(40), &PipelineConfig::default(), None), Err(PipelineError::BadInput(_))));
    }

    #[test]
    fn path_embeds_into_low_hole_host() {
        let (g, meta) = gen_low_hole_graph(400, 0.25, 0.15, 3).unwrap();
        let t = path(400);
        let cfg = PipelineConfig { k: Some(12), seed: 5, ..PipelineConfig::default() };
        let r = embed_spanning_tree(&g, &t, &cfg, Some(meta.hole_bound)).unwrap();
        assert!(r.success(), "{}", r.to_json());
        assert_eq!(r.case, Some(CaseTag::Caterpillars));
        assert!(verify_embedding(&g, &t, r.embedding.as_ref().unwrap()).passed);
    }

    #[test]
    fn star_heavy_tree_takes_the_star_case() {
        let (g, meta) = gen_low_hole_graph(400, 0.25, 0.15, 4).unwrap();
        let t = gen_tree(400, 4, TreeProfile::StarHeavy, 4).unwrap();
        let cfg = PipelineConfig { k: Some(12), seed: 6, ..PipelineConfig::default() };
        let r = embed_spanning_tree(&g, &t, &cfg, Some(meta.hole_bound)).unwrap();
        assert!(r.success(), "{}", r.to_json());
        assert_eq!(r.case, Some(CaseTag::PendantStars));
        for p in [Phase::Sizing, Phase::Partition, Phase::CoreEmbed, Phase::Matchings, Phase::StarMatching, Phase::Verify] {
            let rep = r.phases.iter().find(|x| x.name == p).unwrap_or_else(|| panic!("missing {p}"));
            assert!(matches!(rep.status, PhaseStatus::Ok | PhaseStatus::Warn), "{p}: {rep:?}");
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let (g, meta) = gen_low_hole_graph(400, 0.25, 0.15, 8).unwrap();
        let t = gen_tree(400, 4, TreeProfile::Random, 8).unwrap();
        let cfg = PipelineConfig { k: Some(12), seed: 9, ..PipelineConfig::default() };
        let a = embed_spanning_tree(&g, &t, &cfg, Some(meta.hole_bound)).unwrap().to_json();
        let b = embed_spanning_tree(&g, &t, &cfg, Some(meta.hole_bound)).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn report_round_trips_through_json() {
        let (g, meta) = gen_low_hole_graph(400, 0.25, 0.15, 2).unwrap();
        let t = gen_tree(400, 4, TreeProfile::Caterpillar, 2).unwrap();
        let cfg = PipelineConfig { k: Some(12), seed: 1, ..PipelineConfig::default() };
        let r = embed_spanning_tree(&g, &t, &cfg, Some(meta.hole_bound)).unwrap();
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
