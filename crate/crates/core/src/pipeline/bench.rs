//! Many seeded end-to-end runs in parallel, summarised one row per run.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{embed_spanning_tree, Phase, PipelineConfig, PipelineError};
use crate::gen::{gen_low_hole_graph, gen_tree, TreeProfile};
use crate::rng::{derive, derive_index};
use crate::tree::CaseTag;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchPlan {
    pub sizes: Vec<usize>,
    pub profiles: Vec<TreeProfile>,
    /// Runs per (size, profile) cell.
    pub runs: usize,
    pub eps: f64,
    pub p: f64,
    pub master_seed: u64,
    pub config: PipelineConfig,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            sizes: vec![400],
            profiles: vec![TreeProfile::Path, TreeProfile::Random, TreeProfile::StarHeavy, TreeProfile::Caterpillar],
            runs: 1,
            eps: 0.25,
            p: 0.15,
            master_seed: 0,
            config: PipelineConfig { k: Some(12), timings: true, ..PipelineConfig::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub index: usize,
    pub n: usize,
    pub profile: TreeProfile,
    pub seed: u64,
    pub case: Option<CaseTag>,
    pub success: bool,
    pub failed_phase: Option<Phase>,
    pub attempts: usize,
    pub warnings: usize,
    pub phase_ms: BTreeMap<Phase, u64>,
}

/// Runs every cell of the plan; run `i` draws its host, tree and pipeline
/// seed from `derive_index(master_seed, i)`. Rows come back in index order.
pub fn bench(plan: &BenchPlan) -> Result<Vec<BenchRow>, PipelineError> {
    plan.config.validate()?;
    let cells: Vec<(usize, TreeProfile)> =
        plan.sizes.iter().flat_map(|&n| plan.profiles.iter().flat_map(move |&p| std::iter::repeat_n((n, p), plan.runs))).collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(index, &(n, profile))| {
            let seed = derive_index(plan.master_seed, index as u64);
            let (g, meta) = gen_low_hole_graph(n, plan.eps, plan.p, derive(seed, "host"))?;
            let t = gen_tree(n, plan.config.delta_max, profile, derive(seed, "tree"))?;
            let cfg = PipelineConfig { eps: plan.eps, seed, ..plan.config.clone() };
            let r = embed_spanning_tree(&g, &t, &cfg, Some(meta.hole_bound))?;
            Ok(BenchRow {
                index,
                n,
                profile,
                seed,
                case: r.case,
                success: r.success(),
                failed_phase: r.failed_phase(),
                attempts: r.attempts.len(),
                warnings: r.warnings.len(),
                phase_ms: r.phases.iter().filter_map(|p| Some((p.name, p.ms?))).collect(),
            })
        })
        .collect()
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|x| x.as_str().map(str::to_string)).unwrap_or_default()
}

/// One CSV row per run, with a millisecond column per phase.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["index", "n", "profile", "seed", "case", "success", "failed_phase", "attempts", "warnings"].map(String::from).to_vec();
    header.extend(Phase::ALL.iter().map(|p| format!("ms_{}", p.name().replace('-', "_"))));
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![
            r.index.to_string(),
            r.n.to_string(),
            snake(&r.profile),
            r.seed.to_string(),
            r.case.as_ref().map(snake).unwrap_or_default(),
            r.success.to_string(),
            r.failed_phase.map(|p| p.name().to_string()).unwrap_or_default(),
            r.attempts.to_string(),
            r.warnings.to_string(),
        ];
        rec.extend(Phase::ALL.iter().map(|p| r.phase_ms.get(p).map(u64::to_string).unwrap_or_default()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
