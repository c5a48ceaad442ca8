use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use holetree::embed::{check_expander, Embedding, ExpanderMode, HeuristicCheck};
use holetree::factor::{transversal_factor, verify_factor, TransversalCycle};
use holetree::gen::{gen_blowup, gen_low_hole_graph, gen_space_barrier, gen_tree, InstanceMetadata, TreeProfile};
use holetree::graph::{parse_edge_list, parse_graph_json, parse_partitioned_json, Graph, GraphFile, PartitionedFile, PartitionedGraph};
use holetree::hole::{alpha_star_b, alpha_star_exact, alpha_star_lower_bound, HoleMode};
use holetree::pipeline::{bench, bench_csv, embed_spanning_tree, verify_embedding, BenchPlan, PipelineConfig, RunReport};
use holetree::tree::{classify, parse_tree, write_parent_array, Tree};

/// Largest graph the `analyze hole` command solves exactly by default.
const EXACT_HOLE_LIMIT: usize = 24;

#[derive(Parser)]
#[command(name = "holetree", version, about = "Spanning trees in graphs without large bipartite holes, and transversal cycle factors")]
struct Cli {
    /// Master seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Pipeline configuration (JSON, missing fields take defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a host graph, blow-up or tree. With --out, metadata goes to
    /// a `.meta.json` file next to it.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Hole, tree or expander report for an input file.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCmd,
    },
    /// Embed a spanning tree into a host graph.
    Embed {
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        /// A known strict upper bound on α* of the host.
        #[arg(long)]
        hole_bound: Option<usize>,
    },
    /// Transversal cycle factor of a partitioned graph.
    Factor {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Re-check a factor (partitioned instance) or an embedding (needs --tree).
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Many generated embedding runs in parallel.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "400")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "path,random,star_heavy,caterpillar")]
        profiles: Vec<TreeProfile>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 0.15)]
        p: f64,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Dense base of minimum degree εn united with G(n, p).
    Graph {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 0.15)]
        p: f64,
    },
    /// Random spanning subgraph of the n-blow-up of C_k.
    Blowup {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        /// Minimum degree into each neighbouring part, as a fraction of n.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        blocks: Option<usize>,
    },
    /// Blow-up with no transversal factor.
    Barrier {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Tree in parent-array form.
    Tree {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        delta_max: usize,
        #[arg(long, default_value = "random")]
        profile: TreeProfile,
    },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// α* of a graph, or α*_b of a partitioned graph.
    Hole {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        opts: HoleOpts,
    },
    /// Pendant-star / caterpillar classification.
    Tree {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 4)]
        delta_max: usize,
    },
    /// (n, d)-expander check.
    Expander {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Args)]
struct HoleOpts {
    /// Force the greedy lower bound even on small inputs.
    #[arg(long)]
    lower_bound: bool,
    #[arg(long, default_value_t = 16)]
    budget: usize,
}

/// Everything that ends a command early, with its exit code.
enum Fail {
    /// Bad arguments or unreadable input.
    Usage(String),
    /// The computation ran and its answer is negative; the report was
    /// already written.
    Negative,
}

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail::Usage(e.to_string())
    }
}

type Res = Result<(), Fail>;

struct Ctx {
    seed: u64,
    config: PipelineConfig,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn emit(&self, text: &str) -> Res {
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| Fail::Usage(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, v: &T) -> Res {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.emit(&text)
    }

    fn json_only(&self, what: &str) -> Res {
        match self.format {
            Format::Json => Ok(()),
            Format::Csv => Err(Fail::Usage(format!("{what} has no CSV output"))),
        }
    }

    /// Instance to `--out` (or stdout), metadata next to it.
    fn emit_instance(&self, body: String, meta: &InstanceMetadata) -> Res {
        self.emit(&body)?;
        match &self.out {
            Some(p) => {
                let mp = meta_path(p);
                fs::write(&mp, serde_json::to_string_pretty(meta)? + "\n").map_err(|e| Fail::Usage(format!("{}: {e}", mp.display())))
            }
            None => {
                eprintln!("note: metadata is only written alongside --out");
                Ok(())
            }
        }
    }
}

fn meta_path(p: &Path) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    p.with_file_name(format!("{stem}.meta.json"))
}

fn read(p: &Path) -> Result<String, Fail> {
    fs::read_to_string(p).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))
}

fn read_json(p: &Path) -> Result<Value, Fail> {
    serde_json::from_str(&read(p)?).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))
}

fn read_graph(p: &Path) -> Result<Graph, Fail> {
    let text = read(p)?;
    let g = if text.trim_start().starts_with('{') { parse_graph_json(&text)? } else { parse_edge_list(&text, 0)? };
    Ok(g)
}

fn read_partitioned(p: &Path) -> Result<PartitionedGraph, Fail> {
    Ok(parse_partitioned_json(&read(p)?)?)
}

fn read_tree(p: &Path) -> Result<Tree, Fail> {
    parse_tree(&read(p)?).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))
}

fn is_partitioned(p: &Path) -> bool {
    read_json(p).ok().is_some_and(|v| v.get("parts").is_some())
}

fn run_gen(ctx: &Ctx, what: GenCmd) -> Res {
    let seed = ctx.seed;
    match what {
        GenCmd::Graph { n, eps, p } => {
            let (g, meta) = gen_low_hole_graph(n, eps, p, seed)?;
            ctx.emit_instance(serde_json::to_string(&GraphFile::from_graph(&g))? + "\n", &meta)
        }
        GenCmd::Blowup { k, n, p, delta, blocks } => {
            let (pg, meta) = gen_blowup(n, k, delta, p, blocks, seed)?;
            ctx.emit_instance(serde_json::to_string(&PartitionedFile::from_partitioned(&pg))? + "\n", &meta)
        }
        GenCmd::Barrier { k, n } => {
            let (pg, meta) = gen_space_barrier(n, k, seed)?;
            ctx.emit_instance(serde_json::to_string(&PartitionedFile::from_partitioned(&pg))? + "\n", &meta)
        }
        GenCmd::Tree { n, delta_max, profile } => ctx.emit(&write_parent_array(&gen_tree(n, delta_max, profile, seed)?)),
    }
}

fn run_analyze(ctx: &Ctx, what: AnalyzeCmd) -> Res {
    ctx.json_only("analyze")?;
    match what {
        AnalyzeCmd::Hole { input, opts } => {
            let report = if is_partitioned(&input) {
                let pg = read_partitioned(&input)?;
                let mode = if opts.lower_bound || pg.part_size() > EXACT_HOLE_LIMIT { HoleMode::LowerBound } else { HoleMode::Exact };
                json!({ "quantity": "alpha_star_b", "report": alpha_star_b(&pg, mode, opts.budget, ctx.seed)? })
            } else {
                let g = read_graph(&input)?;
                let r = if opts.lower_bound || g.vertex_count() > EXACT_HOLE_LIMIT {
                    alpha_star_lower_bound(&g, opts.budget, ctx.seed)?
                } else {
                    alpha_star_exact(&g)?
                };
                json!({ "quantity": "alpha_star", "report": r })
            };
            ctx.emit_json(&report)
        }
        AnalyzeCmd::Tree { input, k, delta_max } => {
            let t = read_tree(&input)?;
            let k = k.unwrap_or_else(|| ctx.config.k());
            let cls = classify(&t, k, delta_max)?;
            ctx.emit_json(&json!({
                "n": t.vertex_count(),
                "max_degree": t.max_degree(),
                "leaves": (0..t.vertex_count()).filter(|&v| t.is_leaf(v)).count(),
                "case": cls.case_tag,
                "stars": cls.stars.len(),
                "caterpillars": cls.caterpillars.len(),
                "classification": cls,
            }))
        }
        AnalyzeCmd::Expander { input, d, exact } => {
            let g = read_graph(&input)?;
            let mode = if exact { ExpanderMode::Exact } else { ExpanderMode::Heuristic };
            let cert = check_expander(&g, d, mode, HeuristicCheck { seed: ctx.seed, ..HeuristicCheck::default() })?;
            ctx.emit_json(&json!({ "passed": cert.passed(), "certificate": cert }))?;
            if cert.passed() {
                Ok(())
            } else {
                Err(Fail::Negative)
            }
        }
    }
}

fn phases_csv(r: &RunReport) -> String {
    let mut out = String::from("phase,status,retries,ms,notes\n");
    for p in &r.phases {
        let status = serde_json::to_value(p.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let notes = p.notes.join("; ").replace('"', "\"\"");
        out.push_str(&format!("{},{},{},{},\"{}\"\n", p.name, status, p.retries, p.ms.map(|m| m.to_string()).unwrap_or_default(), notes));
    }
    out
}

fn run_embed(ctx: &Ctx, host: &Path, tree: &Path, hole_bound: Option<usize>) -> Res {
    let g = read_graph(host)?;
    let t = read_tree(tree)?;
    let cfg = PipelineConfig { seed: ctx.seed, ..ctx.config.clone() };
    let report = embed_spanning_tree(&g, &t, &cfg, hole_bound)?;
    match ctx.format {
        Format::Json => ctx.emit(&(report.to_json() + "\n"))?,
        Format::Csv => ctx.emit(&phases_csv(&report))?,
    }
    if !report.success() {
        eprintln!("embedding failed: {:?}", report.outcome);
        return Err(Fail::Negative);
    }
    Ok(())
}

fn run_factor(ctx: &Ctx, input: &Path) -> Res {
    ctx.json_only("factor")?;
    let pg = read_partitioned(input)?;
    match transversal_factor(&pg, &ctx.config.factor, ctx.seed) {
        Ok(run) => ctx.emit_json(&run),
        Err(e) => {
            ctx.emit_json(&json!({ "error": e.to_string() }))?;
            eprintln!("no factor: {e}");
            Err(Fail::Negative)
        }
    }
}

fn run_verify(ctx: &Ctx, input: &Path, witness: &Path, tree: Option<&Path>) -> Res {
    ctx.json_only("verify")?;
    let w = read_json(witness)?;
    let (passed, detail) = if is_partitioned(input) {
        let pg = read_partitioned(input)?;
        let cycles = w.get("factor").unwrap_or(&w);
        let cycles: Vec<Vec<usize>> = serde_json::from_value(cycles.clone())
            .map_err(|e| Fail::Usage(format!("{}: expected a factor (arrays of k indices): {e}", witness.display())))?;
        let checked: Result<Vec<TransversalCycle>, _> = cycles.into_iter().map(|c| TransversalCycle::new(&pg, c)).collect();
        match checked.and_then(|cs| verify_factor(&pg, &cs, &pg.graph().all_vertices()).map(|()| cs.len())) {
            Ok(count) => (true, json!({ "kind": "factor", "passed": true, "cycles": count })),
            Err(e) => (false, json!({ "kind": "factor", "passed": false, "violation": e.to_string() })),
        }
    } else {
        let Some(tree) = tree else {
            return Err(Fail::Usage("verifying an embedding needs --tree".into()));
        };
        let g = read_graph(input)?;
        let t = read_tree(tree)?;
        let emb = w.get("embedding").unwrap_or(&w);
        if emb.is_null() {
            return Err(Fail::Usage(format!("{}: report carries no embedding", witness.display())));
        }
        let emb: Embedding = serde_json::from_value(emb.clone()).map_err(|e| Fail::Usage(format!("{}: {e}", witness.display())))?;
        let verdict = verify_embedding(&g, &t, &emb);
        (verdict.passed, json!({ "kind": "embedding", "passed": verdict.passed, "verdict": verdict }))
    };
    ctx.emit_json(&detail)?;
    if passed {
        Ok(())
    } else {
        Err(Fail::Negative)
    }
}

fn run_bench(ctx: &Ctx, sizes: Vec<usize>, profiles: Vec<TreeProfile>, runs: usize, eps: f64, p: f64) -> Res {
    let plan = BenchPlan { sizes, profiles, runs, eps, p, master_seed: ctx.seed, config: ctx.config.clone() };
    let rows = bench(&plan)?;
    match ctx.format {
        Format::Json => ctx.emit_json(&rows),
        Format::Csv => ctx.emit(&bench_csv(&rows)),
    }
}

fn run(cli: Cli) -> Res {
    let config = match &cli.config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?,
        None => PipelineConfig::default(),
    };
    let ctx = Ctx { seed: cli.seed, config, out: cli.out, format: cli.format };
    match cli.cmd {
        Cmd::Gen { what } => run_gen(&ctx, what),
        Cmd::Analyze { what } => run_analyze(&ctx, what),
        Cmd::Embed { host, tree, hole_bound } => run_embed(&ctx, &host, &tree, hole_bound),
        Cmd::Factor { input } => run_factor(&ctx, &input),
        Cmd::Verify { input, witness, tree } => run_verify(&ctx, &input, &witness, tree.as_deref()),
        Cmd::Bench { sizes, profiles, runs, eps, p } => run_bench(&ctx, sizes, profiles, runs, eps, p),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on its own for usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Negative) => ExitCode::from(1),
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
