mod bench;
mod metrics;
mod params;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mscd::instance::{level_partition, load_instance, Format};
use mscd::primal_dual::{events_from_jsonl, events_to_jsonl, verify_dual};
use mscd::routing::{evaluate, solve_pd_detailed, PdOptions, Router, TreeVariant};
use mscd::trees::DEFAULT_MST_K;
use mscd::{Instance, Solution};

use bench::{parse_format, run_bench, BenchConfig, DEFAULT_ALGORITHMS};
use metrics::{metrics_row, run_algo, write_csv, Algo};
use params::GenParams;

#[derive(Parser)]
#[command(name = "mscd", version, about = "Min-sum collaborative delivery with vehicles of different speeds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON.
    Gen {
        #[command(flatten)]
        params: GenParams,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance; writes the solution JSON and a one-row metrics CSV.
    Solve(SolveArgs),
    /// Re-check a solution against its instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "json", value_parser = parse_format)]
        format: Format,
        #[arg(long)]
        solution: PathBuf,
        /// Event log written by `solve --events`; compared with a replay.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run a parameter sweep and write metrics and ratio CSVs.
    Bench(BenchArgs),
}

#[derive(Args, Clone, Copy)]
struct SolverFlags {
    #[arg(long, default_value = "pd")]
    algo: AlgoFlag,
    #[arg(long, default_value = "mst")]
    tree: TreeVariant,
    #[arg(long, default_value = "dfs")]
    router: Router,
    /// Guard factor, only with `--tree prim-mst-k` (default 7).
    #[arg(long)]
    mst_k: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum AlgoFlag {
    Baseline,
    Pd,
    SingleDepot,
}

impl SolverFlags {
    fn algo(&self) -> Result<Algo> {
        if self.mst_k.is_some() && self.tree != TreeVariant::PrimMstK {
            bail!("--mst-k only applies to --tree prim-mst-k");
        }
        let mst_k = self.mst_k.unwrap_or(DEFAULT_MST_K);
        Ok(match self.algo {
            AlgoFlag::Baseline => Algo::Baseline,
            AlgoFlag::SingleDepot => Algo::SingleDepot,
            AlgoFlag::Pd => Algo::Pd(PdOptions { tree: self.tree, router: self.router, mst_k }),
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: Format,
    #[command(flatten)]
    solver: SolverFlags,
    /// Solution file; standard output when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Metrics CSV; defaults to `<out>.metrics.csv` when `--out` is given.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Write the moat-growing event log (JSON lines).
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Flat TOML sweep description; other sweep flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: GenParams,
    #[arg(long)]
    axis: Option<String>,
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long = "algos", value_delimiter = ',')]
    algorithms: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    trees: Vec<TreeVariant>,
    #[arg(long)]
    mst_k: Option<f64>,
    /// Real-data instance used instead of generated ones.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: Format,
    #[arg(short, long, default_value = "metrics.csv")]
    out: PathBuf,
    /// Ratio CSV; defaults to `<out>` with a `.ratios.csv` suffix.
    #[arg(long)]
    ratios: Option<PathBuf>,
}

impl BenchArgs {
    fn config(&self) -> Result<BenchConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return BenchConfig::from_toml(&text, path.parent().unwrap_or(Path::new(".")));
        }
        let cfg = BenchConfig {
            params: self.params,
            axis: self.axis.clone(),
            values: self.values.clone(),
            seeds: if self.seeds.is_empty() { vec![self.params.seed] } else { self.seeds.clone() },
            algorithms: if self.algorithms.is_empty() {
                DEFAULT_ALGORITHMS.map(String::from).to_vec()
            } else {
                self.algorithms.clone()
            },
            trees: if self.trees.is_empty() { vec![TreeVariant::Mst] } else { self.trees.clone() },
            mst_k: self.mst_k.unwrap_or(DEFAULT_MST_K),
            instance: self.instance.clone(),
            format: self.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn gen(params: &GenParams, out: Option<&Path>) -> Result<ExitCode> {
    let inst = params.generate()?;
    write_or_print(out, &inst.to_json()?)?;
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path, format: Format) -> Result<Instance> {
    load_instance(path, format).with_context(|| format!("loading {}", path.display()))
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let inst = load(&args.instance, args.format)?;
    let algo = args.solver.algo()?;
    if args.events.is_some() && !matches!(algo, Algo::Pd(_)) {
        bail!("--events needs --algo pd");
    }
    let outcome = run_algo(&inst, algo)?;
    write_or_print(args.out.as_deref(), &outcome.solution.to_json()?)?;
    let metrics = args.metrics.clone().or_else(|| args.out.as_deref().map(|o| with_suffix(o, ".metrics.csv")));
    if let Some(path) = metrics {
        write_csv(&path, &[metrics_row(&inst, algo, &outcome)])?;
    }
    if let (Some(path), Some(run)) = (&args.events, &outcome.run) {
        fs::write(path, events_to_jsonl(&run.state)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Rebuilds the options a pd solution was produced with.
fn pd_options(sol: &Solution) -> Result<Option<PdOptions>> {
    let Some(router) = sol.algorithm.strip_prefix("pd-") else {
        return Ok(None);
    };
    let tree = match sol.params.get("tree").and_then(|t| t.as_str()) {
        Some(t) => t.parse()?,
        None => bail!("pd solution without a tree variant in params"),
    };
    let mst_k = sol.params.get("mst_k").and_then(|v| v.as_f64()).unwrap_or(DEFAULT_MST_K);
    Ok(Some(PdOptions { tree, router: router.parse()?, mst_k }))
}

fn verify(instance: &Path, format: Format, solution: &Path, events: Option<&Path>) -> Result<ExitCode> {
    let inst = load(instance, format)?;
    let text = fs::read_to_string(solution).with_context(|| format!("reading {}", solution.display()))?;
    let sol = Solution::from_json(&text).with_context(|| format!("parsing {}", solution.display()))?;
    let eval = evaluate(&sol, &inst);
    let mut ok = eval.feasible;
    let mut report = json!({"evaluation": eval});

    match pd_options(&sol)? {
        Some(opts) => {
            let run = solve_pd_detailed(&inst, opts)?;
            let cert = verify_dual(&run.state, &run.graph, &run.large_trees);
            ok &= cert.passed();
            let reproduced = run.solution.routes == sol.routes;
            report["reproduced"] = json!(reproduced);
            report["levels"] = json!(level_partition(&inst).h());
            report["verification"] = serde_json::to_value(&cert)?;
            if let Some(path) = events {
                let logged = events_from_jsonl(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
                let same = logged == run.state.events;
                report["events_match"] = json!(same);
                ok &= same;
            }
        }
        None if events.is_some() => bail!("--events applies to pd solutions only"),
        None => {}
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn bench(args: &BenchArgs) -> Result<ExitCode> {
    let cfg = args.config()?;
    let (rows, ratios) = run_bench(&cfg, |r| {
        eprintln!(
            "{} n={} seed={:?} {} {} cost={:.3} time={:.3}s",
            r.kind,
            r.n,
            r.seed,
            r.algo,
            r.tree.as_deref().unwrap_or("-"),
            r.cost,
            r.time_total_s
        )
    })?;
    write_csv(&args.out, &rows)?;
    let ratio_path = args.ratios.clone().unwrap_or_else(|| with_suffix(&args.out, ".ratios.csv"));
    write_csv(&ratio_path, &ratios)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Gen { params, out } => gen(params, out.as_deref()),
        Command::Solve(args) => solve(args),
        Command::Verify { instance, format, solution, events } => verify(instance, *format, solution, events.as_deref()),
        Command::Bench(args) => bench(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are parameter errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
