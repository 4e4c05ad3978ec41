//! File-backed run configuration.

use std::path::PathBuf;

use serde::Deserialize;

use bcc_concat::inner_codes::CodeId;
use bcc_concat::lattice::Boundary;
use bcc_concat::montecarlo::TrialConfig;
use bcc_concat::noise::{NoiseModel, NoiseSpec};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Error-rate grid: an explicit list or `steps` evenly spaced values.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PGrid {
    List(Vec<f64>),
    Range { min: f64, max: f64, steps: usize },
}

impl PGrid {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match *self {
            PGrid::List(ref v) => Ok(v.clone()),
            PGrid::Range { min, max, steps } => match steps {
                0 => Err("p grid needs at least one step".into()),
                1 => Ok(vec![min]),
                _ => Ok((0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect()),
            },
        }
    }
}

fn default_boundary() -> Boundary {
    Boundary::Torus
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(alias = "schemes")]
    pub scheme: OneOrMany<CodeId>,
    pub model: NoiseModel,
    pub p: PGrid,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Accepted for completeness; `--threads` on the command line wins.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| format!("bad config: {e}"))?;
        if cfg.scheme.to_vec().is_empty() {
            return Err("config lists no scheme".into());
        }
        if cfg.l.is_empty() {
            return Err("config lists no lattice size".into());
        }
        if cfg.p.values()?.is_empty() {
            return Err("config has an empty p grid".into());
        }
        Ok(cfg)
    }

    /// One validated trial configuration per `(scheme, p, L)`.
    pub fn trial_configs(&self) -> bcc_concat::Result<Vec<TrialConfig>> {
        let ps = self.p.values().map_err(bcc_concat::Error::Config)?;
        let mut out = Vec::new();
        for id in self.scheme.to_vec() {
            for &p in &ps {
                for &l in &self.l {
                    let mut t = TrialConfig::new(id, NoiseSpec::new(self.model, p), l, self.trials);
                    t.boundary = self.boundary;
                    t.master_seed = self.master_seed;
                    t.validate()?;
                    out.push(t);
                }
            }
        }
        Ok(out)
    }
}
