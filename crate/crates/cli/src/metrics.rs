use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use mscd::instance::level_partition;
use mscd::routing::{
    evaluate, solve_baseline, solve_pd_detailed, solve_single_depot, PdOptions, PdRun, Router, StageTimes, TreeVariant,
};
use mscd::{Instance, Solution};

/// One row of the metrics CSV. Field order is the column order.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub kind: String,
    pub n: usize,
    pub k: usize,
    pub h: usize,
    pub c: Option<u64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub algo: String,
    pub tree: Option<String>,
    pub router: Option<String>,
    pub cost: f64,
    pub time_total_s: f64,
    pub time_tree_s: f64,
    pub time_pd_s: f64,
    pub time_route_s: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub kind: String,
    pub n: usize,
    pub k: usize,
    pub h: usize,
    pub c: Option<u64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub algo: String,
    pub tree: Option<String>,
    pub router: Option<String>,
    /// pd cost / baseline cost
    pub cost_ratio: f64,
    /// pd time / baseline time
    pub time_ratio: f64,
    pub baseline_over_pd: f64,
}

impl RatioRow {
    pub fn new(pd: &MetricsRow, base: &MetricsRow) -> RatioRow {
        RatioRow {
            kind: pd.kind.clone(),
            n: pd.n,
            k: pd.k,
            h: pd.h,
            c: pd.c,
            sigma: pd.sigma,
            alpha: pd.alpha,
            seed: pd.seed,
            algo: pd.algo.clone(),
            tree: pd.tree.clone(),
            router: pd.router.clone(),
            cost_ratio: pd.cost / base.cost,
            time_ratio: pd.time_total_s / base.time_total_s,
            baseline_over_pd: base.cost / pd.cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algo {
    Baseline,
    SingleDepot,
    Pd(PdOptions),
}

impl Algo {
    /// Parses `baseline`, `single-depot` or `pd-<router>`.
    pub fn parse(name: &str, tree: TreeVariant, mst_k: f64) -> Result<Algo> {
        Ok(match name {
            "baseline" => Algo::Baseline,
            "single-depot" => Algo::SingleDepot,
            _ => match name.strip_prefix("pd-") {
                Some(r) => Algo::Pd(PdOptions { tree, router: r.parse::<Router>()?, mst_k }),
                None => bail!("unknown algorithm {name:?}"),
            },
        })
    }

    pub fn name(&self) -> String {
        match self {
            Algo::Baseline => "baseline".into(),
            Algo::SingleDepot => "single-depot".into(),
            Algo::Pd(o) => format!("pd-{}", o.router),
        }
    }
}

pub struct Outcome {
    pub solution: Solution,
    pub times: StageTimes,
    pub run: Option<PdRun>,
}

pub fn run_algo(inst: &Instance, algo: Algo) -> Result<Outcome> {
    let t0 = Instant::now();
    Ok(match algo {
        Algo::Baseline | Algo::SingleDepot => {
            let solution = if algo == Algo::Baseline { solve_baseline(inst) } else { solve_single_depot(inst)? };
            let total = t0.elapsed().as_secs_f64();
            Outcome { solution, times: StageTimes { route_s: total, total_s: total, ..Default::default() }, run: None }
        }
        Algo::Pd(opts) => {
            let run = solve_pd_detailed(inst, opts)?;
            Outcome { solution: run.solution.clone(), times: run.times, run: Some(run) }
        }
    })
}

fn param<T: serde::de::DeserializeOwned>(inst: &Instance, key: &str) -> Option<T> {
    inst.meta.get("params").and_then(|p| p.get(key)).and_then(|v| serde_json::from_value(v.clone()).ok())
}

pub fn metrics_row(inst: &Instance, algo: Algo, out: &Outcome) -> MetricsRow {
    let kind = match inst.meta.get("generator") {
        Some(Value::String(s)) => s.clone(),
        _ => "file".into(),
    };
    let (tree, router) = match algo {
        Algo::Pd(o) => (Some(o.tree.to_string()), Some(o.router.to_string())),
        _ => (None, None),
    };
    MetricsRow {
        kind,
        n: inst.m(),
        k: inst.k(),
        h: level_partition(inst).h(),
        c: param(inst, "c"),
        sigma: param(inst, "sigma"),
        alpha: param(inst, "alpha"),
        seed: inst.meta.get("seed").and_then(Value::as_u64),
        algo: algo.name(),
        tree,
        router,
        cost: out.solution.total_cost,
        time_total_s: out.times.total_s,
        time_tree_s: out.times.tree_s,
        time_pd_s: out.times.pd_s,
        time_route_s: out.times.route_s,
        feasible: evaluate(&out.solution, inst).feasible,
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_rows(file, rows)
}

pub fn write_rows<T: Serialize, W: Write>(w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
pub const METRICS_HEADER: &str =
    "kind,n,k,h,c,sigma,alpha,seed,algo,tree,router,cost,time_total_s,time_tree_s,time_pd_s,time_route_s,feasible";
