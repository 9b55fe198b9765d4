use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use mscd::instance::{gen_gmm, gen_uniform, gen_worst_case, DEFAULT_DECAY};
use mscd::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    WorstCase,
    Uniform,
    Gmm,
}

/// Generator parameters. Defaults follow the usual synthetic setting:
/// 10 000 requests, 30 depots over 3 speed levels.
#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    #[arg(long, value_enum, default_value = "uniform")]
    pub kind: Kind,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub h: usize,
    /// Gaussian clusters (gmm).
    #[arg(long, default_value_t = 10)]
    pub c: usize,
    /// Cluster standard deviation (gmm).
    #[arg(long, default_value_t = 5.0)]
    pub sigma: f64,
    /// Fast-to-slow speed ratio (worst-case).
    #[arg(long, default_value_t = 1000.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Speed ratio between consecutive levels.
    #[arg(long, default_value_t = DEFAULT_DECAY)]
    pub decay: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            kind: Kind::Uniform,
            n: 10_000,
            k: 30,
            h: 3,
            c: 10,
            sigma: 5.0,
            alpha: 1000.0,
            epsilon: 0.01,
            decay: DEFAULT_DECAY,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn generate(&self) -> Result<Instance> {
        Ok(match self.kind {
            Kind::WorstCase => gen_worst_case(self.n, 1.0, self.alpha, self.epsilon)?,
            Kind::Uniform => gen_uniform(self.n, self.k, self.h, self.decay, self.seed)?,
            Kind::Gmm => gen_gmm(self.n, self.k, self.h, self.c, self.sigma, self.decay, self.seed)?,
        })
    }

    /// Sets the parameter named `axis`.
    pub fn set(&mut self, axis: &str, value: f64) -> Result<()> {
        let count = || -> Result<usize> {
            if value < 0.0 || value.fract() != 0.0 {
                bail!("{axis} must be a non-negative integer, got {value}");
            }
            Ok(value as usize)
        };
        match axis {
            "n" => self.n = count()?,
            "k" => self.k = count()?,
            "h" => self.h = count()?,
            "c" => self.c = count()?,
            "sigma" => self.sigma = value,
            "alpha" => self.alpha = value,
            "epsilon" => self.epsilon = value,
            "decay" => self.decay = value,
            _ => bail!("unknown sweep axis {axis:?}"),
        }
        Ok(())
    }
}
