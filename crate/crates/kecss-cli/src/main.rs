use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kecss::augment::{augment, bicriteria, kecss, AugmentConfig, KecssConfig, RunSummary};
use kecss::congest::Budget;
use kecss::cutinfo::{audit_cutinfo, PathProvider};
use kecss::gen::{self, LowerBoundParams};
use kecss::graph::{mst, EdgeSubset, WeightedMultigraph};
use kecss::oracle::{self, ENUMERATION_GUARD};
use kecss::respect::{build_packing, PackingMode};
use kecss::rho::{estimate_rho, first_step_trace, RhoConfig, ALPHA};

#[derive(Parser)]
#[command(name = "kecss", version, about = "Distributed k-ECSS approximation on a simulated CONGEST network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance in the graph text format.
    Gen(GenArgs),
    /// Run an algorithm on a graph file and emit its summary.
    Run(RunArgs),
    /// Cross-check a run artifact against the centralized oracles.
    Verify(VerifyArgs),
    /// Sweep n on a family and emit rounds-vs-n CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Random,
    PathOfCliques,
    LowerBound,
    LowerBoundSimple,
    CycleOfCliques,
}

#[derive(Clone, Copy, ValueEnum)]
enum Packing {
    Faithful,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Paths {
    Oracle,
    Padded,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Kecss,
    Augment,
    Bicriteria,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Vertices (random, path-of-cliques) or cliques (cycle-of-cliques).
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest edge weight; defaults to n^3.
    #[arg(long)]
    w_max: Option<u64>,
    /// Extra random edges on top of the cycles (random family).
    #[arg(long, default_value_t = 0)]
    extra: usize,
    /// Paths in the lower-bound families.
    #[arg(long, default_value_t = 3)]
    x: usize,
    /// Path length in the lower-bound families.
    #[arg(long, default_value_t = 3)]
    y: usize,
    #[arg(long, default_value_t = 2)]
    alpha: u64,
    /// Input bitstring of x - 1 bits.
    #[arg(long, default_value = "00")]
    a: String,
    #[arg(long, default_value = "00")]
    b: String,
    /// Heavy variant of the cycle of cliques.
    #[arg(long)]
    heavy: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Words per message per edge per round.
    #[arg(long)]
    budget_words: Option<u64>,
    #[arg(long, value_enum, default_value = "oracle")]
    packing: Packing,
    /// Packing size in faithful mode.
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long, value_enum, default_value = "oracle")]
    paths: Paths,
    /// Decoy paths per tree edge with padded paths.
    #[arg(long, default_value_t = 2)]
    decoys: usize,
}

impl AlgoArgs {
    fn seed(&self) -> Result<u64> {
        match std::env::var("KECSS_SEED") {
            Ok(s) => s.trim().parse().with_context(|| format!("KECSS_SEED={s:?} is not an integer")),
            Err(_) => Ok(self.seed),
        }
    }

    fn rho_config(&self) -> Result<RhoConfig> {
        let mut cfg = RhoConfig {
            packing: match self.packing {
                Packing::Faithful => PackingMode::Faithful,
                Packing::Oracle => PackingMode::Oracle,
            },
            trees: self.trees,
            paths: match self.paths {
                Paths::Oracle => PathProvider::Oracle,
                Paths::Padded => PathProvider::Padded { decoys: self.decoys, seed: self.seed()? },
            },
            ..RhoConfig::default()
        };
        if let Some(w) = self.budget_words {
            cfg.budget = Budget::Words(w);
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "kecss")]
    algorithm: Algorithm,
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Run artifact whose subset is the (k-1)-connected base for augment;
    /// defaults to the MST.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Per-part connectivity scale for bicriteria.
    #[arg(long)]
    rho: Option<usize>,
    /// Also compute the exact optimum (small instances only).
    #[arg(long)]
    opt: bool,
    /// Check epoch decay against the oracle after every epoch.
    #[arg(long)]
    instrument: bool,
    /// Where to write the full run artifact; the summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Run artifact written by `run --out`.
    #[arg(long)]
    run: PathBuf,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Smallest share of estimates inside [true, alpha * true].
    #[arg(long, default_value_t = 0.95)]
    rho_share: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "path-of-cliques")]
    family: Family,
    #[arg(long, value_delimiter = ',', default_value = "256,1024,4096")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget_words: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_graph(path: &Path) -> Result<WeightedMultigraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(WeightedMultigraph::from_text(&text)?)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn subset_of(g: &WeightedMultigraph, artifact: &Value) -> Result<EdgeSubset> {
    let ids = artifact["subset"].as_array().ok_or_else(|| anyhow!("artifact has no subset array"))?;
    let mut ids: Vec<usize> = ids
        .iter()
        .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| anyhow!("subset entry {v} is not an edge id")))
        .collect::<Result<_>>()?;
    ids.sort_unstable();
    if let Some(bad) = ids.iter().find(|&&id| !g.contains(id)) {
        bail!("subset names edge {bad}, which is not in the graph");
    }
    Ok(EdgeSubset::from_ids(g.id_bound(), ids))
}

fn family_graph(family: Family, n: usize, k: usize, w_max: Option<u64>, seed: u64) -> Result<WeightedMultigraph> {
    let w = w_max.unwrap_or_else(|| (n as u64).pow(3).max(1));
    Ok(match family {
        Family::Random => gen::random_kconnected(n, k, 0, w, seed)?,
        Family::PathOfCliques => gen::path_of_cliques(n, k, w, seed)?,
        _ => bail!("this family is not parameterized by n alone"),
    })
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let lower = || -> Result<LowerBoundParams> {
        Ok(LowerBoundParams { x: a.x, y: a.y, k: a.k, alpha: a.alpha, a: gen::parse_bits(&a.a)?, b: gen::parse_bits(&a.b)? })
    };
    let g = match a.family {
        Family::Random => {
            let w = a.w_max.unwrap_or_else(|| (a.n as u64).pow(3).max(1));
            gen::random_kconnected(a.n, a.k, a.extra, w, a.seed)?
        }
        Family::PathOfCliques => family_graph(a.family, a.n, a.k, a.w_max, a.seed)?,
        Family::LowerBound => gen::lower_bound_multigraph(&lower()?)?,
        Family::LowerBoundSimple => gen::lower_bound_simple(&lower()?)?,
        Family::CycleOfCliques => gen::cycle_of_cliques(a.n, a.k, a.alpha, a.heavy)?,
    };
    emit(a.out.as_deref(), &g.to_text())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let seed = a.algo.seed()?;
    let augment_cfg = AugmentConfig { rho: a.algo.rho_config()?, instrument: a.instrument, ..AugmentConfig::default() };
    let cfg = KecssConfig { augment: augment_cfg, restarts: a.restarts };
    let opt_cost = if a.opt { Some(oracle::optimal_kecss(&g, a.k)?.cost) } else { None };
    let ratio = |cost: u64| opt_cost.map(|o| if o == 0 { 1.0 } else { cost as f64 / o as f64 });

    let (name, summary, subset, detail) = match a.algorithm {
        Algorithm::Kecss => {
            let run = kecss(&g, a.k, &cfg, seed)?;
            let s = run.summary(opt_cost);
            let detail = json!({ "restart_costs": run.restart_costs, "augmentations": run.augmentations, "trace": run.trace });
            ("kecss", s, run.subset, detail)
        }
        Algorithm::Augment => {
            let base = match &a.base {
                Some(p) => subset_of(&g, &read_json(p)?)?,
                None => mst(&g)?,
            };
            let run = augment(&g, &base, a.k, &cfg.augment, seed)?;
            let subset = base.union(&run.added);
            let cost = g.weight_of(&subset);
            let s = RunSummary {
                k: a.k,
                cost,
                opt_cost,
                ratio: ratio(cost),
                rounds: run.trace.rounds,
                oracle_calls: run.trace.oracle_calls,
                epochs: run.epochs.len(),
            };
            ("augment", s, subset, json!({ "base": base, "augmentation": run }))
        }
        Algorithm::Bicriteria => {
            let run = bicriteria(&g, a.k, a.epsilon, a.rho, &cfg, seed)?;
            let s = RunSummary {
                k: a.k,
                cost: run.cost,
                opt_cost,
                ratio: ratio(run.cost),
                rounds: run.trace.rounds,
                oracle_calls: run.trace.oracle_calls,
                epochs: 0,
            };
            let detail = json!({
                "rho": run.rho,
                "parts": run.parts,
                "part_targets": run.part_targets,
                "union_connectivity": run.union_connectivity,
                "fallback": run.fallback,
                "trace": run.trace,
            });
            ("bicriteria", s, run.subset, detail)
        }
    };
    let summary_json = serde_json::to_value(&summary)?;
    if let Some(out) = &a.out {
        let artifact = json!({
            "algorithm": name,
            "k": a.k,
            "seed": seed,
            "summary": summary_json,
            "subset": subset,
            "detail": detail,
        });
        emit(Some(out), &format!("{}\n", serde_json::to_string_pretty(&artifact)?))?;
    }
    println!("{}", serde_json::to_string(&summary_json)?);
    Ok(())
}

struct Check {
    name: &'static str,
    ok: bool,
    detail: Value,
}

/// Estimates for every edge outside `subset` against the exact covered
/// counts of the minimum cuts of `subset`.
fn rho_check(g: &WeightedMultigraph, subset: &EdgeSubset, lambda: usize, a: &VerifyArgs, seed: u64) -> Result<Check> {
    let h = g.restrict(subset)?;
    let est = estimate_rho(g, subset, lambda, &a.algo.rho_config()?, seed)?;
    let mut inside = 0;
    let mut misses = Vec::new();
    for e in &est.edges {
        let truth = oracle::exact_covered_count(&h, g.edge(e.edge_id))? as f64;
        if e.est >= truth && e.est <= ALPHA * truth {
            inside += 1;
        } else {
            misses.push(json!({ "edge": e.edge_id, "est": e.est, "covered": truth }));
        }
    }
    let total = est.edges.len();
    let share = if total == 0 { 1.0 } else { inside as f64 / total as f64 };
    Ok(Check {
        name: "rho estimates",
        ok: share >= a.rho_share && est.trace.bandwidth_ok(),
        detail: json!({
            "edges": total,
            "inside_window": inside,
            "share": share,
            "required": a.rho_share,
            "bandwidth_ok": est.trace.bandwidth_ok(),
            "misses": misses,
        }),
    })
}

fn cutinfo_check(h: &WeightedMultigraph, lambda: usize, a: &VerifyArgs, seed: u64) -> Result<Check> {
    let cfg = a.algo.rho_config()?;
    let packing = build_packing(h, PackingMode::Oracle, seed, None)?;
    let mut pairs = 0;
    let mut mismatches = Vec::new();
    let mut bandwidth_ok = true;
    for (i, tree) in packing.trees.iter().enumerate() {
        let audit = audit_cutinfo(h, tree, lambda as u64, cfg.paths, cfg.budget, seed)?;
        pairs += audit.pairs;
        bandwidth_ok &= audit.bandwidth_ok;
        for (t, t2) in audit.exact_mismatches {
            mismatches.push(json!({ "tree": i, "t": t, "t_prime": t2, "learner": "exact" }));
        }
        for (t, t2) in audit.learned_mismatches {
            mismatches.push(json!({ "tree": i, "t": t, "t_prime": t2, "learner": "distributed" }));
        }
    }
    Ok(Check {
        name: "cutinfo decoding",
        ok: mismatches.is_empty() && bandwidth_ok,
        detail: json!({ "trees": packing.trees.len(), "pairs": pairs, "bandwidth_ok": bandwidth_ok, "mismatches": mismatches }),
    })
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let g = read_graph(&a.graph)?;
    let artifact = read_json(&a.run)?;
    let seed = a.algo.seed()?;
    let k = artifact["k"].as_u64().ok_or_else(|| anyhow!("artifact has no k"))? as usize;
    let subset = subset_of(&g, &artifact)?;
    let h = g.restrict(&subset)?;
    let mut checks = Vec::new();

    let cost = g.weight_of(&subset);
    let claimed = artifact["summary"]["cost"].as_u64();
    checks.push(Check { name: "cost", ok: claimed == Some(cost), detail: json!({ "claimed": claimed, "actual": cost }) });

    let lambda = oracle::min_cut(&h);
    let mut want = k;
    if let Some(u) = artifact["detail"]["union_connectivity"].as_u64() {
        if artifact["detail"]["fallback"] == json!(false) {
            want = u as usize;
        }
    }
    checks.push(Check {
        name: "connectivity",
        ok: lambda >= want,
        detail: json!({ "required": want, "actual": lambda }),
    });

    if let Some(opt) = artifact["summary"]["opt_cost"].as_u64() {
        let exact = oracle::optimal_kecss(&g, k)?.cost;
        checks.push(Check { name: "optimum", ok: exact == opt && cost >= opt, detail: json!({ "claimed": opt, "actual": exact }) });
    }

    if lambda >= 1 && h.n() <= ENUMERATION_GUARD {
        checks.push(rho_check(&g, &subset, lambda, &a, seed)?);
    }
    if lambda >= 1 {
        checks.push(cutinfo_check(&h, lambda, &a, seed)?);
    }

    let ok = checks.iter().all(|c| c.ok);
    let report = json!({
        "ok": ok,
        "checks": checks.iter().map(|c| json!({ "name": c.name, "ok": c.ok, "detail": c.detail })).collect::<Vec<_>>(),
    });
    emit(a.out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
    for c in checks.iter().filter(|c| !c.ok) {
        eprintln!("verify: {} failed: {}", c.name, c.detail);
    }
    Ok(ok)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let budget = a.budget_words.map(Budget::Words).unwrap_or(RhoConfig::default().budget);
    let graphs = a
        .sizes
        .iter()
        .map(|&n| family_graph(a.family, n, a.k, Some(100), a.seed))
        .collect::<Result<Vec<_>>>()?;
    let traces = kecss::par::map(&graphs, |g| first_step_trace(g, budget, a.seed));
    let mut csv = String::from("n,m,rounds,words_sent,max_message_words,bandwidth_ok\n");
    for (g, t) in graphs.iter().zip(traces) {
        let t = t?;
        csv += &format!("{},{},{},{},{},{}\n", g.n(), g.m(), t.rounds, t.words_sent, t.max_message_words, t.bandwidth_ok());
    }
    emit(a.out.as_deref(), &csv)
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
