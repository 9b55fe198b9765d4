use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use mscd::instance::{load_instance, Format};
use mscd::routing::TreeVariant;
use mscd::trees::DEFAULT_MST_K;
use mscd::Instance;

use crate::metrics::{metrics_row, run_algo, Algo, MetricsRow, RatioRow};
use crate::params::GenParams;

/// A sweep: one parameter varies over `values`, everything else is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub params: GenParams,
    pub axis: Option<String>,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<String>,
    pub trees: Vec<TreeVariant>,
    pub mst_k: f64,
    /// Real data instead of generated instances.
    pub instance: Option<PathBuf>,
    pub format: Format,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepKeys {
    axis: Option<String>,
    #[serde(default)]
    values: Vec<f64>,
    seeds: Option<Vec<u64>>,
    algorithms: Option<Vec<String>>,
    trees: Option<Vec<String>>,
    mst_k: Option<f64>,
    instance: Option<PathBuf>,
    format: Option<String>,
}

const SWEEP_KEYS: [&str; 8] = ["axis", "values", "seeds", "algorithms", "trees", "mst_k", "instance", "format"];

pub const DEFAULT_ALGORITHMS: [&str; 4] = ["baseline", "pd-dfs", "pd-greedy", "pd-dgreedy"];

pub fn parse_format(s: &str) -> Result<Format> {
    match s {
        "json" => Ok(Format::Json),
        "courier-csv" => Ok(Format::CourierCsv),
        _ => bail!("unknown instance format {s:?}"),
    }
}

impl BenchConfig {
    /// Flat TOML: generator parameters plus the sweep keys.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<BenchConfig> {
        let mut table: toml::Table = toml::from_str(text).context("parsing bench config")?;
        let mut sweep = toml::Table::new();
        for key in SWEEP_KEYS {
            if let Some(v) = table.remove(key) {
                sweep.insert(key.into(), v);
            }
        }
        let params: GenParams = table.try_into().context("bench config parameters")?;
        let s: SweepKeys = sweep.try_into().context("bench config sweep keys")?;
        let trees = match s.trees {
            Some(t) => t.iter().map(|x| x.parse()).collect::<mscd::Result<Vec<_>>>()?,
            None => vec![TreeVariant::Mst],
        };
        let cfg = BenchConfig {
            params,
            axis: s.axis,
            values: s.values,
            seeds: s.seeds.unwrap_or_else(|| vec![params.seed]),
            algorithms: s.algorithms.unwrap_or_else(|| DEFAULT_ALGORITHMS.map(String::from).to_vec()),
            trees,
            mst_k: s.mst_k.unwrap_or(DEFAULT_MST_K),
            instance: s.instance.map(|p| if p.is_relative() { base_dir.join(p) } else { p }),
            format: parse_format(s.format.as_deref().unwrap_or("json"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("bench needs at least one seed");
        }
        if self.algorithms.is_empty() || self.trees.is_empty() {
            bail!("bench needs at least one algorithm and one tree variant");
        }
        if self.axis.is_some() && self.values.is_empty() {
            bail!("sweep axis given without values");
        }
        if self.axis.is_none() && !self.values.is_empty() {
            bail!("sweep values given without an axis");
        }
        for a in &self.algorithms {
            Algo::parse(a, TreeVariant::Mst, self.mst_k)?;
        }
        if let Some(axis) = &self.axis {
            let mut p = self.params;
            p.set(axis, self.values[0])?;
        }
        Ok(())
    }

    /// Algorithms in run order: each `pd-*` once per tree variant.
    fn algos(&self) -> Vec<Algo> {
        let mut out = Vec::new();
        for name in &self.algorithms {
            if name.starts_with("pd-") {
                for &t in &self.trees {
                    out.push(Algo::parse(name, t, self.mst_k).expect("validated"));
                }
            } else {
                out.push(Algo::parse(name, TreeVariant::Mst, self.mst_k).expect("validated"));
            }
        }
        out
    }

    /// Instances in sweep order.
    fn points(&self) -> Result<Vec<GenParams>> {
        let values: Vec<Option<f64>> =
            if self.axis.is_some() { self.values.iter().copied().map(Some).collect() } else { vec![None] };
        let mut out = Vec::new();
        for v in values {
            for &seed in &self.seeds {
                let mut p = self.params;
                if let (Some(axis), Some(v)) = (&self.axis, v) {
                    p.set(axis, v)?;
                }
                p.seed = seed;
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// Runs the sweep point by point, in config order. Points run one after the
/// other so that wall times are not distorted by contention.
pub fn run_bench(cfg: &BenchConfig, mut progress: impl FnMut(&MetricsRow)) -> Result<(Vec<MetricsRow>, Vec<RatioRow>)> {
    let real: Option<Instance> = match &cfg.instance {
        Some(p) => Some(load_instance(p, cfg.format).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let points = if real.is_some() { vec![cfg.params] } else { cfg.points()? };
    for p in points {
        let inst = match &real {
            Some(i) => i.clone(),
            None => p.generate()?,
        };
        let mut base: Option<MetricsRow> = None;
        for algo in cfg.algos() {
            let out = run_algo(&inst, algo)?;
            let row = metrics_row(&inst, algo, &out);
            progress(&row);
            if algo == Algo::Baseline {
                base = Some(row.clone());
            } else if let (Algo::Pd(_), Some(b)) = (algo, &base) {
                ratios.push(RatioRow::new(&row, b));
            }
            rows.push(row);
        }
    }
    Ok((rows, ratios))
}
