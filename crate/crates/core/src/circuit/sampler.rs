//! Circuit-level depolarizing noise on the primal sublattice.
//!
//! Only two components of a fault reach the primal X readout: a Z on a
//! primal qubit flips it directly, and an X on a dual qubit becomes a Z on
//! the primal partner of every later gate of that dual qubit. X on primal
//! and Z on dual qubits only touch the dual readout and are not sampled.

use rand::Rng;

use super::GateSchedule;
use crate::error::Result;
use crate::lattice::{LatticeLayout, Sublattice};
use crate::noise::{bernoulli_positions, sample_single_depolarizing, sample_two_qubit_depolarizing, PauliFrame};

/// Precompiled sampler producing primal block flip masks.
#[derive(Clone, Debug)]
pub struct CircuitSampler {
    s: usize,
    n_primal_qubits: usize,
    /// Per gate (grouped by dual qubit, in time order), the primal target as
    /// `sub_index * s + qubit`.
    targets: Vec<u32>,
    /// Per gate, one past the last gate of its group.
    group_end: Vec<u32>,
    /// Per dual qubit with gates, its gate range.
    groups: Vec<(u32, u32)>,
    /// Idle primal qubits (one entry per idle step).
    primal_idles: Vec<u32>,
    /// Idle dual qubits as the range of their later gates.
    dual_idles: Vec<(u32, u32)>,
}

impl CircuitSampler {
    pub fn new(layout: &LatticeLayout, schedule: &GateSchedule) -> Self {
        let s = schedule.block_size;
        let primal_of = |q: u32| -> u32 {
            let b = &layout.blocks[q as usize / s];
            debug_assert_eq!(b.sublattice, Sublattice::Primal);
            b.sub_index * s as u32 + (q as usize % s) as u32
        };
        let mut gates: Vec<(u32, usize, u32)> = Vec::new();
        for (t, step) in schedule.steps.iter().enumerate() {
            for g in step {
                gates.push((g.dual, t, primal_of(g.primal)));
            }
        }
        gates.sort_unstable();
        let mut group_end = vec![0u32; gates.len()];
        let mut groups = Vec::new();
        let mut first_gate = std::collections::HashMap::new();
        let mut i = 0;
        while i < gates.len() {
            let mut j = i;
            while j < gates.len() && gates[j].0 == gates[i].0 {
                j += 1;
            }
            group_end[i..j].iter_mut().for_each(|e| *e = j as u32);
            groups.push((i as u32, j as u32));
            first_gate.insert(gates[i].0, (i, j));
            i = j;
        }

        let mut primal_idles = Vec::new();
        let mut dual_idles = Vec::new();
        for t in 0..schedule.n_steps() {
            for b in schedule.idle_blocks(layout, t) {
                let block = &layout.blocks[b as usize];
                for q in 0..s {
                    let global = b * s as u32 + q as u32;
                    match block.sublattice {
                        Sublattice::Primal => primal_idles.push(primal_of(global)),
                        Sublattice::Dual => {
                            if let Some(&(start, end)) = first_gate.get(&global) {
                                let from = (start..end).find(|&k| gates[k].1 > t).unwrap_or(end);
                                if from < end {
                                    dual_idles.push((from as u32, end as u32));
                                }
                            }
                        }
                    }
                }
            }
        }

        CircuitSampler {
            s,
            n_primal_qubits: layout.primal_blocks.len() * s,
            targets: gates.iter().map(|g| g.2).collect(),
            group_end,
            groups,
            primal_idles,
            dual_idles,
        }
    }

    /// Sample one trial's primal Z flips into `masks` (one per primal block).
    pub fn sample<R: Rng + ?Sized>(&self, p: f64, rng: &mut R, masks: &mut [u8]) {
        masks.iter_mut().for_each(|m| *m = 0);
        let s = self.s;
        let targets = &self.targets;
        let flip = |masks: &mut [u8], q: u32| masks[q as usize / s] ^= 1 << (q as usize % s);
        let toggle = |masks: &mut [u8], from: u32, to: u32| {
            for &q in &targets[from as usize..to as usize] {
                masks[q as usize / s] ^= 1 << (q as usize % s);
            }
        };

        // Preparation and pre-measurement Z components, combined.
        let both = 2.0 * p * (1.0 - p);
        bernoulli_positions(self.n_primal_qubits, both, rng, |q| flip(masks, q as u32));
        // Dual preparation X component.
        let mut hits = Vec::new();
        bernoulli_positions(self.groups.len(), p, rng, |g| hits.push(g));
        for g in hits.drain(..) {
            let (a, b) = self.groups[g];
            toggle(masks, a, b);
        }
        // Gate faults with a relevant component.
        bernoulli_positions(targets.len(), 12.0 * p / 15.0, rng, |k| hits.push(k));
        for k in hits.drain(..) {
            let r = rng.gen_range(0..3u32);
            if r != 1 {
                flip(masks, targets[k]);
            }
            if r != 0 {
                toggle(masks, k as u32 + 1, self.group_end[k]);
            }
        }
        bernoulli_positions(self.primal_idles.len(), p, rng, |k| hits.push(k));
        for k in hits.drain(..) {
            flip(masks, self.primal_idles[k]);
        }
        bernoulli_positions(self.dual_idles.len(), p, rng, |k| hits.push(k));
        for k in hits.drain(..) {
            let (a, b) = self.dual_idles[k];
            toggle(masks, a, b);
        }
    }
}

/// Full Pauli-frame simulation of one noisy circuit: depolarizing noise after
/// preparation, after every gate, on idle blocks and before measurement.
/// Returns the end-of-circuit frame over all qubits.
pub fn sample_circuit_reference<R: Rng + ?Sized>(
    layout: &LatticeLayout,
    schedule: &GateSchedule,
    p: f64,
    rng: &mut R,
) -> Result<PauliFrame> {
    let s = schedule.block_size;
    let n = schedule.n_qubits(layout);
    let mut frame = PauliFrame::new(n);
    for q in 0..n {
        sample_single_depolarizing(&mut frame, q, p, rng)?;
    }
    for (t, step) in schedule.steps.iter().enumerate() {
        for g in step {
            let (d, pr) = (g.dual as usize, g.primal as usize);
            if frame.x[d] {
                frame.z[pr] ^= true;
            }
            if frame.x[pr] {
                frame.z[d] ^= true;
            }
        }
        for g in step {
            sample_two_qubit_depolarizing(&mut frame, g.dual as usize, g.primal as usize, p, rng)?;
        }
        for b in schedule.idle_blocks(layout, t) {
            for q in 0..s {
                sample_single_depolarizing(&mut frame, b as usize * s + q, p, rng)?;
            }
        }
    }
    for q in 0..n {
        sample_single_depolarizing(&mut frame, q, p, rng)?;
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::schedule_for;
    use crate::inner_codes::{code, CodeId};
    use crate::lattice::{build_lattice, Boundary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Per-position marginal flip rates and pairwise same-block coincidence
    /// of the fast and the reference sampler agree.
    fn compare(id: CodeId, boundary: Boundary, p: f64, trials: usize) {
        let lay = build_lattice(3, boundary).unwrap();
        let c = code(id);
        let sched = schedule_for(c, &lay).unwrap();
        let fast = CircuitSampler::new(&lay, &sched);
        let s = c.size;
        let nb = lay.primal_blocks.len();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut masks = vec![0u8; nb];
        let mut count_fast = vec![0u64; 1 << s];
        let mut count_ref = vec![0u64; 1 << s];
        for _ in 0..trials {
            fast.sample(p, &mut rng, &mut masks);
            for &m in &masks {
                count_fast[m as usize] += 1;
            }
            let f = sample_circuit_reference(&lay, &sched, p, &mut rng).unwrap();
            for &b in &lay.primal_blocks {
                let m = (0..s).fold(0u8, |acc, q| acc | (f.z[b as usize * s + q] as u8) << q);
                count_ref[m as usize] += 1;
            }
        }
        let total = (trials * nb) as f64;
        for m in 0..1 << s {
            let (a, b) = (count_fast[m] as f64 / total, count_ref[m] as f64 / total);
            let sigma = ((a * (1.0 - a) + b * (1.0 - b)) / total).sqrt().max(1e-9);
            assert!((a - b).abs() < 5.0 * sigma + 1e-12, "{id} mask {m}: {a} vs {b}");
        }
    }

    #[test]
    fn fast_sampler_matches_reference_rep2() {
        compare(CodeId::Rep2, Boundary::Torus, 0.02, 400);
    }

    #[test]
    fn fast_sampler_matches_reference_rough_cubic() {
        compare(CodeId::Cubic, Boundary::RoughZ, 0.03, 400);
    }

    #[test]
    fn fast_sampler_matches_reference_mixed3() {
        compare(CodeId::Mixed3, Boundary::Torus, 0.02, 300);
    }

    #[test]
    fn zero_noise_is_clean() {
        let lay = build_lattice(3, Boundary::Torus).unwrap();
        let c = code(CodeId::Rep3);
        let sched = schedule_for(c, &lay).unwrap();
        let fast = CircuitSampler::new(&lay, &sched);
        let mut masks = vec![1u8; lay.primal_blocks.len()];
        fast.sample(0.0, &mut ChaCha8Rng::seed_from_u64(1), &mut masks);
        assert!(masks.iter().all(|&m| m == 0));
    }
}
