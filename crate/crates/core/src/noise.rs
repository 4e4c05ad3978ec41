//! Noise channels in the Pauli-frame representation.
//!
//! Only flips relative to the noiseless state are tracked. Every qubit is
//! finally measured in the X basis, so on the decoded sublattice only the Z
//! component of an error matters; X components matter through CZ propagation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner_codes::InnerCode;
use crate::lattice::LatticeLayout;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    #[serde(alias = "phen", alias = "indep")]
    Phenomenological,
    #[serde(alias = "circuit", alias = "circ")]
    CircuitLevel,
    #[serde(alias = "biased")]
    BiasedZ,
}

impl NoiseModel {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseModel::Phenomenological => "phenomenological",
            NoiseModel::CircuitLevel => "circuit_level",
            NoiseModel::BiasedZ => "biased_z",
        }
    }

    /// Largest admissible `p`.
    pub fn max_p(self) -> f64 {
        match self {
            NoiseModel::Phenomenological | NoiseModel::CircuitLevel => 2.0 / 3.0,
            NoiseModel::BiasedZ => 1.0,
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phenomenological" | "phen" | "indep" => Ok(NoiseModel::Phenomenological),
            "circuit_level" | "circuit" | "circ" => Ok(NoiseModel::CircuitLevel),
            "biased_z" | "biased" => Ok(NoiseModel::BiasedZ),
            _ => Err(Error::config(format!(
                "unknown noise model '{s}' (expected phenomenological, circuit_level or biased_z)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub p: f64,
    /// Per-position Z rates keyed `q1`, `q2`, ... (biased model only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_location_overrides: Option<BTreeMap<String, f64>>,
}

impl NoiseSpec {
    pub fn new(model: NoiseModel, p: f64) -> Self {
        NoiseSpec { model, p, per_location_overrides: None }
    }

    pub fn validate(&self) -> Result<()> {
        check_rate(self.p, self.model.max_p(), self.model.as_str())?;
        if let Some(map) = &self.per_location_overrides {
            if self.model != NoiseModel::BiasedZ {
                return Err(Error::config("per-location overrides are only valid for biased_z"));
            }
            for (k, &v) in map {
                check_rate(v, 1.0, k)?;
            }
        }
        Ok(())
    }

    /// Per-qubit-position Z flip rates of the equivalent phenomenological
    /// model. `factors` are the per-position multipliers of the biased model.
    pub fn position_rates(&self, code: &InnerCode, factors: &[f64]) -> Result<Vec<f64>> {
        let rates: Vec<f64> = match self.model {
            NoiseModel::Phenomenological | NoiseModel::CircuitLevel => vec![self.p; code.size],
            NoiseModel::BiasedZ => (0..code.size)
                .map(|q| {
                    self.per_location_overrides
                        .as_ref()
                        .and_then(|m| m.get(&format!("q{}", q + 1)).copied())
                        .unwrap_or(factors[q] * self.p)
                })
                .collect(),
        };
        for (q, &r) in rates.iter().enumerate() {
            check_rate(r, 1.0, &format!("effective rate of q{}", q + 1))?;
        }
        Ok(rates)
    }
}

fn check_rate(p: f64, max: f64, what: &str) -> Result<()> {
    if !(0.0..=max).contains(&p) {
        return Err(Error::config(format!("{what}: rate {p} outside [0, {max:.4}]")));
    }
    Ok(())
}

/// Per-physical-qubit X and Z flip bits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PauliFrame {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        PauliFrame { x: vec![false; n], z: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        !self.x.iter().chain(&self.z).any(|&b| b)
    }

    /// Apply a single-qubit Pauli given as (x, z) components.
    #[inline]
    pub fn apply(&mut self, q: usize, x: bool, z: bool) {
        self.x[q] ^= x;
        self.z[q] ^= z;
    }

    pub fn xor(&mut self, other: &PauliFrame) {
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }
}

/// Pauli index 1..=3 as (x, z): X, Y, Z.
#[inline]
fn pauli_bits(i: u32) -> (bool, bool) {
    (i & 1 == 1, i & 2 == 2)
}

/// Single-qubit depolarizing channel `(1 - 3p/2) rho + p/2 (X rho X + Y rho Y + Z rho Z)`.
pub fn sample_single_depolarizing<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    q: usize,
    p: f64,
    rng: &mut R,
) -> Result<()> {
    check_rate(p, 2.0 / 3.0, "single-qubit depolarizing")?;
    if rng.gen::<f64>() < 1.5 * p {
        let (x, z) = pauli_bits(rng.gen_range(1..4));
        frame.apply(q, x, z);
    }
    Ok(())
}

/// Two-qubit depolarizing channel: each of the 15 non-identity Paulis with
/// probability `p/15`.
pub fn sample_two_qubit_depolarizing<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    a: usize,
    b: usize,
    p: f64,
    rng: &mut R,
) -> Result<()> {
    check_rate(p, 15.0 / 16.0, "two-qubit depolarizing")?;
    if a == b {
        return Err(Error::input("two-qubit channel on a single qubit"));
    }
    if rng.gen::<f64>() < p {
        let k = rng.gen_range(1..16u32);
        let (xa, za) = pauli_bits(k & 3);
        let (xb, zb) = pauli_bits(k >> 2);
        frame.apply(a, xa, za);
        frame.apply(b, xb, zb);
    }
    Ok(())
}

/// Fully Z-biased two-qubit channel: ZZ, ZI, IZ with probability `p/3` each.
pub fn sample_biased_two_qubit<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    a: usize,
    b: usize,
    p: f64,
    rng: &mut R,
) -> Result<()> {
    check_rate(p, 1.0, "biased two-qubit")?;
    if a == b {
        return Err(Error::input("two-qubit channel on a single qubit"));
    }
    if rng.gen::<f64>() < p {
        match rng.gen_range(0..3u32) {
            0 => {
                frame.z[a] ^= true;
                frame.z[b] ^= true;
            }
            1 => frame.z[a] ^= true,
            _ => frame.z[b] ^= true,
        }
    }
    Ok(())
}

/// Draw positions of successes of i.i.d. Bernoulli(`p`) trials over `0..n`,
/// by geometric skipping.
pub fn bernoulli_positions<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R, mut hit: impl FnMut(usize)) {
    if p <= 0.0 || n == 0 {
        return;
    }
    if p >= 1.0 {
        (0..n).for_each(hit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut pos = 0usize;
    loop {
        // 1 - gen() lies in (0, 1], keeping the logarithm finite.
        let u: f64 = 1.0 - rng.gen::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (n - pos) as f64 {
            return;
        }
        pos += skip as usize;
        hit(pos);
        pos += 1;
        if pos >= n {
            return;
        }
    }
}

/// Per-block Z flip masks over `n_blocks` blocks with per-position rates.
pub fn sample_block_masks<R: Rng + ?Sized>(rates: &[f64], rng: &mut R, out: &mut [u8]) {
    out.iter_mut().for_each(|m| *m = 0);
    let s = rates.len();
    if rates.windows(2).all(|w| w[0] == w[1]) {
        let p = rates.first().copied().unwrap_or(0.0);
        bernoulli_positions(out.len() * s, p, rng, |i| out[i / s] |= 1 << (i % s));
    } else {
        for (q, &p) in rates.iter().enumerate() {
            bernoulli_positions(out.len(), p, rng, |b| out[b] |= 1 << q);
        }
    }
}

/// Z flips on every primal physical qubit (index `block * s + qubit`) at
/// rate `p`: the Z marginal of the single-qubit depolarizing channel.
pub fn sample_phenomenological_flips<R: Rng + ?Sized>(
    layout: &LatticeLayout,
    code: &InnerCode,
    p: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    sample_heterogeneous_flips(layout, &vec![p; code.size], rng)
}

/// Like [`sample_phenomenological_flips`] with one rate per qubit position.
pub fn sample_heterogeneous_flips<R: Rng + ?Sized>(
    layout: &LatticeLayout,
    rates: &[f64],
    rng: &mut R,
) -> Result<Vec<bool>> {
    for &r in rates {
        check_rate(r, 1.0, "flip rate")?;
    }
    let s = rates.len();
    let mut masks = vec![0u8; layout.primal_blocks.len()];
    sample_block_masks(rates, rng, &mut masks);
    Ok(masks.iter().flat_map(|&m| (0..s).map(move |q| m >> q & 1 == 1)).collect())
}
