//! Reproducible Monte Carlo estimation of logical failure rates.
//!
//! Trial `t` of a run draws from its own ChaCha8 stream: the generator is
//! seeded with the master seed and switched to stream `t`. Results are
//! therefore identical whatever the number of worker threads.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::biased_factors;
use crate::circuit::{schedule_for, CircuitSampler};
use crate::decoder::{BlockReadout, Decoder};
use crate::error::{Error, Result};
use crate::inner_codes::{code, CodeId, InnerCode};
use crate::lattice::{build_lattice, Boundary, LatticeLayout};
use crate::noise::{sample_block_masks, NoiseModel, NoiseSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub code: CodeId,
    pub noise: NoiseSpec,
    pub l: usize,
    pub boundary: Boundary,
    pub trials: u64,
    pub master_seed: u64,
}

impl TrialConfig {
    pub fn new(code: CodeId, noise: NoiseSpec, l: usize, trials: u64) -> Self {
        TrialConfig { code, noise, l, boundary: Boundary::Torus, trials, master_seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        self.noise.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TrialStats {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, 1.96);
        TrialStats { trials, failures, p_l: failures as f64 / trials.max(1) as f64, ci_low, ci_high }
    }

    /// Standard error of `p_l` with a floor of one failure, for weighting fits.
    pub fn sigma(&self) -> f64 {
        let n = self.trials as f64;
        let p = self.p_l.max(1.0 / n);
        (p * (1.0 - p) / n).sqrt().max(1.0 / n)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Random stream of trial `index`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

enum Source {
    Independent(Vec<f64>),
    Circuit(CircuitSampler, f64),
    /// Block-level erasures and flips injected directly.
    Erasure {
        p_pauli: f64,
        p_erase: f64,
    },
}

/// Shared read-only state of one simulation point.
pub struct Experiment {
    pub config: TrialConfig,
    pub layout: LatticeLayout,
    code: &'static InnerCode,
    source: Source,
}

/// Per-worker mutable state.
pub struct Workspace {
    masks: Vec<u8>,
    readout: BlockReadout,
    decoder: Decoder,
}

impl Workspace {
    /// Readout of the last sampled trial.
    pub fn readout(&self) -> &BlockReadout {
        &self.readout
    }
}

impl Experiment {
    pub fn new(config: TrialConfig) -> Result<Self> {
        config.validate()?;
        let layout = build_lattice(config.l, config.boundary)?;
        let code = code(config.code);
        let source = match config.noise.model {
            NoiseModel::Phenomenological => Source::Independent(config.noise.position_rates(code, &[])?),
            NoiseModel::BiasedZ => {
                let sched = schedule_for(code, &layout)?;
                Source::Independent(config.noise.position_rates(code, &biased_factors(&sched))?)
            }
            NoiseModel::CircuitLevel => {
                let sched = schedule_for(code, &layout)?;
                Source::Circuit(CircuitSampler::new(&layout, &sched), config.noise.p)
            }
        };
        Ok(Experiment { config, layout, code, source })
    }

    /// Plain cubic lattice with erasure rate `p_erase` and, on unerased
    /// blocks, flip rate `p_pauli`. Erased blocks carry a uniformly random
    /// flip.
    pub fn with_erasures(
        l: usize,
        boundary: Boundary,
        p_pauli: f64,
        p_erase: f64,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        for (name, v) in [("Pauli rate", p_pauli), ("erasure rate", p_erase)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} {v} outside [0, 1]")));
            }
        }
        let config = TrialConfig {
            code: CodeId::Cubic,
            noise: NoiseSpec::new(NoiseModel::Phenomenological, p_pauli),
            l,
            boundary,
            trials,
            master_seed: seed,
        };
        config.validate()?;
        let layout = build_lattice(l, boundary)?;
        Ok(Experiment { config, layout, code: code(CodeId::Cubic), source: Source::Erasure { p_pauli, p_erase } })
    }

    pub fn workspace(&self) -> Workspace {
        let n = self.layout.primal_blocks.len();
        Workspace {
            masks: vec![0; n],
            readout: BlockReadout { logical_flip: vec![false; n], erased: vec![false; n] },
            decoder: Decoder::new(&self.layout.primal),
        }
    }

    /// Sample the primal block readout of trial `index` into `ws`.
    /// The result is available through [`Workspace::readout`].
    pub fn sample_readout(&self, index: u64, ws: &mut Workspace) {
        let mut rng = trial_rng(self.config.master_seed, index);
        let r = &mut ws.readout;
        match &self.source {
            Source::Independent(rates) => sample_block_masks(rates, &mut rng, &mut ws.masks),
            Source::Circuit(sampler, p) => sampler.sample(*p, &mut rng, &mut ws.masks),
            Source::Erasure { p_pauli, p_erase } => {
                for i in 0..ws.masks.len() {
                    let erased = rng.gen::<f64>() < *p_erase;
                    r.erased[i] = erased;
                    r.logical_flip[i] = if erased { rng.gen::<bool>() } else { rng.gen::<f64>() < *p_pauli };
                }
                return;
            }
        }
        let table = self.code.outcome_table();
        for (i, &m) in ws.masks.iter().enumerate() {
            let o = table[m as usize];
            r.erased[i] = o.detected;
            r.logical_flip[i] = o.logical_flip;
        }
    }

    pub fn run_trial_with(&self, index: u64, ws: &mut Workspace) -> Result<bool> {
        self.sample_readout(index, ws);
        let out = ws.decoder.decode(&self.layout.primal, &ws.readout.logical_flip, &ws.readout.erased)?;
        Ok(out.failure)
    }

    pub fn run_trial(&self, index: u64) -> Result<bool> {
        self.run_trial_with(index, &mut self.workspace())
    }

    /// All trials, in parallel on the current rayon pool.
    pub fn run_point(&self) -> Result<TrialStats> {
        let failures = (0..self.config.trials)
            .into_par_iter()
            .map_init(|| self.workspace(), |ws, i| self.run_trial_with(i, ws).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        Ok(TrialStats::from_counts(failures, self.config.trials))
    }
}

/// Run a single trial from scratch.
pub fn run_trial(config: &TrialConfig, index: u64) -> Result<bool> {
    Experiment::new(config.clone())?.run_trial(index)
}

pub fn run_point(config: &TrialConfig) -> Result<TrialStats> {
    Experiment::new(config.clone())?.run_point()
}

/// Run every `(p, L)` point of a grid for one scheme, in `p`-major order.
pub fn run_grid(
    code: CodeId,
    model: NoiseModel,
    ps: &[f64],
    ls: &[usize],
    boundary: Boundary,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::with_capacity(ps.len() * ls.len());
    for &p in ps {
        for &l in ls {
            let mut cfg = TrialConfig::new(code, NoiseSpec::new(model, p), l, trials);
            cfg.boundary = boundary;
            cfg.master_seed = master_seed;
            let stats = Experiment::new(cfg.clone())?.run_point()?;
            rows.push(ResultRow::new(&cfg, &stats));
        }
    }
    Ok(rows)
}

/// One row of the results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: CodeId,
    pub model: NoiseModel,
    pub p: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub boundary: Boundary,
    pub trials: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
}

impl ResultRow {
    pub fn new(config: &TrialConfig, stats: &TrialStats) -> Self {
        ResultRow {
            scheme: config.code,
            model: config.noise.model,
            p: config.noise.p,
            l: config.l,
            boundary: config.boundary,
            trials: stats.trials,
            failures: stats.failures,
            p_l: stats.p_l,
            ci_low: stats.ci_low,
            ci_high: stats.ci_high,
            master_seed: config.master_seed,
        }
    }

    /// Identity of a point for resuming.
    pub fn key(&self) -> PointKey {
        (self.scheme, self.model, self.p.to_bits(), self.l, self.boundary)
    }

    pub fn stats(&self) -> TrialStats {
        TrialStats {
            trials: self.trials,
            failures: self.failures,
            p_l: self.p_l,
            ci_low: self.ci_low,
            ci_high: self.ci_high,
        }
    }
}

pub type PointKey = (CodeId, NoiseModel, u64, usize, Boundary);

pub fn config_key(config: &TrialConfig) -> PointKey {
    (config.code, config.noise.model, config.noise.p.to_bits(), config.l, config.boundary)
}

/// Read all rows of a results file; a missing file has no rows.
pub fn read_results(path: &Path) -> io::Result<Vec<ResultRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_path(path).map_err(io::Error::other)?;
    rdr.deserialize().map(|r| r.map_err(io::Error::other)).collect()
}

pub fn existing_keys(path: &Path) -> io::Result<HashSet<PointKey>> {
    Ok(read_results(path)?.iter().map(ResultRow::key).collect())
}

/// Append rows, writing the header only when the file is new or empty.
pub fn append_results(path: &Path, rows: &[ResultRow]) -> io::Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 1000, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi < 0.004);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_never_fails() {
        for model in [NoiseModel::Phenomenological, NoiseModel::CircuitLevel, NoiseModel::BiasedZ] {
            let cfg = TrialConfig::new(CodeId::Rep2, NoiseSpec::new(model, 0.0), 3, 1000);
            let st = run_point(&cfg).unwrap();
            assert_eq!(st.failures, 0);
            assert!(st.ci_high < 0.004);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut cfg = TrialConfig::new(CodeId::Cubic, NoiseSpec::new(NoiseModel::Phenomenological, 0.03), 4, 300);
        cfg.master_seed = 99;
        let a = run_point(&cfg).unwrap();
        let b = run_point(&cfg).unwrap();
        assert_eq!(a, b);
        let single: u64 = (0..300).map(|i| run_trial(&cfg, i).unwrap() as u64).sum();
        assert_eq!(single, a.failures);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = TrialConfig::new(CodeId::Cubic, NoiseSpec::new(NoiseModel::Phenomenological, 0.01), 3, 0);
        assert!(run_point(&cfg).is_err());
    }
}
