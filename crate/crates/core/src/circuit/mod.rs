//! CZ gate schedules for the concatenated cluster state and Pauli frame
//! propagation through them.
//!
//! A schedule is written once for a single dual block (every CZ edge has
//! exactly one dual endpoint) and replayed uniformly over the lattice. Each
//! local gate names the direction of the edge and the qubit on each side.

mod detect;
mod sampler;

pub use detect::{
    canonicalize, cluster_stabilizer, coset_signatures, detectability_check, effective_error_table, format_pattern,
    search_mixed3_schedule, signature, EffectiveErrorRow, FaultKind, FaultRecord, FaultReport, Signature, Verdict,
    ZPattern,
};
pub use sampler::{sample_circuit_reference, CircuitSampler};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner_codes::{CodeId, InnerCode};
use crate::lattice::{Direction, LatticeLayout, NONE};
use crate::noise::PauliFrame;

/// One physical CZ relative to a dual block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LocalGate {
    pub direction: Direction,
    pub dual_qubit: u8,
    pub primal_qubit: u8,
}

impl LocalGate {
    const fn new(direction: Direction, dual_qubit: u8, primal_qubit: u8) -> Self {
        LocalGate { direction, dual_qubit, primal_qubit }
    }
}

/// Which gate ordering to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// The detectable ordering shipped for each code.
    #[default]
    Standard,
    /// [[2,1,1]] only: both physical gates of a logical CZ back to back.
    Natural,
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "fig5" | "default" => Ok(ScheduleKind::Standard),
            "natural" => Ok(ScheduleKind::Natural),
            _ => Err(Error::config(format!("unknown schedule '{s}' (expected fig5 or natural)"))),
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::Standard => "standard",
            ScheduleKind::Natural => "natural",
        })
    }
}

/// Physical qubit pairs `(dual qubit, primal qubit)` realizing one logical CZ.
pub fn logical_cz_pairs(code: CodeId) -> Vec<(u8, u8)> {
    match code {
        CodeId::Cubic => vec![(0, 0)],
        CodeId::Rep2 => vec![(0, 0), (1, 1), (0, 1), (1, 0)],
        CodeId::Rep3 => (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect(),
        CodeId::Mixed3 => vec![(0, 0), (0, 1), (1, 0), (2, 2)],
        CodeId::Subsystem4 => vec![(0, 0), (1, 2), (2, 1), (3, 3)],
        CodeId::Steane7 => (0..7).map(|q| (q, q)).collect(),
    }
}

/// Gate ordering of the [[3,1,1]]_2 scheme: `a` gates in the first round,
/// `b` gates in the second, `c` gates of direction `C_ORDER[f]` at step
/// `4 + f`, and `d` gates in the round given by `D_ROUND`.
pub(crate) const MIXED3_C_ORDER: [usize; 4] = [0, 1, 2, 3];
pub(crate) const MIXED3_D_ROUND: usize = 0;

/// Local pattern for the given code and ordering.
pub fn local_schedule(code: CodeId, kind: ScheduleKind) -> Result<Vec<Vec<LocalGate>>> {
    let dirs = Direction::ALL;
    if kind == ScheduleKind::Natural && code != CodeId::Rep2 {
        return Err(Error::config(format!("no natural schedule for code {code}")));
    }
    Ok(match (code, kind) {
        (CodeId::Rep2, ScheduleKind::Standard) => {
            let mut steps: Vec<Vec<LocalGate>> =
                dirs.iter().map(|&d| vec![LocalGate::new(d, 0, 0), LocalGate::new(d, 1, 1)]).collect();
            steps.extend(dirs.iter().map(|&d| vec![LocalGate::new(d, 0, 1), LocalGate::new(d, 1, 0)]));
            steps
        }
        (CodeId::Rep2, ScheduleKind::Natural) => dirs
            .iter()
            .flat_map(|&d| {
                [
                    vec![LocalGate::new(d, 0, 0), LocalGate::new(d, 1, 1)],
                    vec![LocalGate::new(d, 0, 1), LocalGate::new(d, 1, 0)],
                ]
            })
            .collect(),
        (CodeId::Rep3, _) => (0..3u8)
            .flat_map(|r| dirs.iter().map(move |&d| (0..3u8).map(|i| LocalGate::new(d, i, (i + r) % 3)).collect()))
            .collect(),
        (CodeId::Mixed3, _) => mixed3_schedule(MIXED3_C_ORDER, MIXED3_D_ROUND),
        (CodeId::Cubic | CodeId::Subsystem4 | CodeId::Steane7, _) => {
            let pairs = logical_cz_pairs(code);
            dirs.iter().map(|&d| pairs.iter().map(|&(a, b)| LocalGate::new(d, a, b)).collect()).collect()
        }
    })
}

pub(crate) fn mixed3_schedule(c_order: [usize; 4], d_round: usize) -> Vec<Vec<LocalGate>> {
    let dirs = Direction::ALL;
    let mut steps = vec![Vec::new(); 8];
    for (f, &d) in dirs.iter().enumerate() {
        steps[f].push(LocalGate::new(d, 0, 0));
        steps[4 + f].push(LocalGate::new(d, 0, 1));
        steps[4 + f].push(LocalGate::new(dirs[c_order[f]], 1, 0));
        steps[4 * d_round + f].push(LocalGate::new(d, 2, 2));
    }
    steps
}

/// A physical CZ between two global qubit ids (`block * s + qubit`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhysicalGate {
    pub dual: u32,
    pub primal: u32,
}

/// The full gate schedule of a lattice.
#[derive(Clone, Debug, Serialize)]
pub struct GateSchedule {
    pub code: CodeId,
    pub kind: ScheduleKind,
    pub block_size: usize,
    pub local: Vec<Vec<LocalGate>>,
    pub steps: Vec<Vec<PhysicalGate>>,
}

/// The shipped schedule for `code` on `layout`.
pub fn schedule_for(code: &InnerCode, layout: &LatticeLayout) -> Result<GateSchedule> {
    schedule_with(code, layout, ScheduleKind::Standard)
}

pub fn schedule_with(code: &InnerCode, layout: &LatticeLayout, kind: ScheduleKind) -> Result<GateSchedule> {
    let local = local_schedule(code.id, kind)?;
    expand(code, layout, kind, local)
}

/// Replay a local pattern over every dual block and validate the result.
pub fn expand(
    code: &InnerCode,
    layout: &LatticeLayout,
    kind: ScheduleKind,
    local: Vec<Vec<LocalGate>>,
) -> Result<GateSchedule> {
    let s = code.size as u32;
    let steps = local
        .iter()
        .map(|step| {
            let mut gates = Vec::new();
            for e in &layout.cz_edges {
                for g in step.iter().filter(|g| g.direction == e.direction) {
                    gates.push(PhysicalGate {
                        dual: e.dual * s + g.dual_qubit as u32,
                        primal: e.primal * s + g.primal_qubit as u32,
                    });
                }
            }
            gates
        })
        .collect();
    let sched = GateSchedule { code: code.id, kind, block_size: code.size, local, steps };
    sched.validate(layout)?;
    Ok(sched)
}

impl GateSchedule {
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn n_qubits(&self, layout: &LatticeLayout) -> usize {
        layout.n_blocks() * self.block_size
    }

    /// Collision-freedom per step, and every CZ edge realizing the code's
    /// qubit pairing exactly once.
    pub fn validate(&self, layout: &LatticeLayout) -> Result<()> {
        let n = self.n_qubits(layout);
        let mut stamp = vec![usize::MAX; n];
        for (t, step) in self.steps.iter().enumerate() {
            for g in step {
                for q in [g.dual, g.primal] {
                    if stamp[q as usize] == t {
                        return Err(Error::internal(format!("qubit {q} used twice in step {t}")));
                    }
                    stamp[q as usize] = t;
                }
            }
        }
        let mut want = logical_cz_pairs(self.code);
        want.sort_unstable();
        for dir in Direction::ALL {
            let mut have: Vec<(u8, u8)> = self
                .local
                .iter()
                .flatten()
                .filter(|g| g.direction == dir)
                .map(|g| (g.dual_qubit, g.primal_qubit))
                .collect();
            have.sort_unstable();
            if have != want {
                return Err(Error::internal(format!("direction {dir} realizes {have:?}, expected {want:?}")));
            }
        }
        let expected: usize = layout.cz_edges.len() * want.len();
        let total: usize = self.steps.iter().map(Vec::len).sum();
        if total != expected {
            return Err(Error::internal(format!("{total} gates, expected {expected}")));
        }
        Ok(())
    }

    /// Number of gates acting on each qubit position of a bulk block.
    pub fn gates_per_position(&self) -> Vec<usize> {
        let mut dual = vec![0usize; self.block_size];
        let mut primal = vec![0usize; self.block_size];
        for g in self.local.iter().flatten() {
            dual[g.dual_qubit as usize] += 1;
            primal[g.primal_qubit as usize] += 1;
        }
        debug_assert_eq!(dual, primal);
        primal
    }

    /// Blocks without any gate in `step` (only at rough boundaries).
    pub fn idle_blocks(&self, layout: &LatticeLayout, step: usize) -> Vec<u32> {
        let mut busy = vec![false; layout.n_blocks()];
        let s = self.block_size as u32;
        for g in &self.steps[step] {
            busy[(g.dual / s) as usize] = true;
            busy[(g.primal / s) as usize] = true;
        }
        (0..layout.n_blocks() as u32).filter(|&b| !busy[b as usize]).collect()
    }

    /// Step index to list of `[dual qubit, primal qubit]` pairs.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Export<'a> {
            code: CodeId,
            kind: ScheduleKind,
            local: &'a [Vec<LocalGate>],
            steps: Vec<Vec<[u32; 2]>>,
        }
        let steps = self.steps.iter().map(|s| s.iter().map(|g| [g.dual, g.primal]).collect()).collect();
        serde_json::to_string(&Export { code: self.code, kind: self.kind, local: &self.local, steps })
            .expect("schedule serializes")
    }
}

/// Conjugate `frame` through every gate at steps `>= from_step`.
pub fn propagate_in_place(frame: &mut PauliFrame, schedule: &GateSchedule, from_step: usize) -> Result<()> {
    if from_step > schedule.n_steps() {
        return Err(Error::input(format!(
            "from_step {from_step} beyond the {} steps of the schedule",
            schedule.n_steps()
        )));
    }
    for step in &schedule.steps[from_step..] {
        for g in step {
            let (d, p) = (g.dual as usize, g.primal as usize);
            if frame.x[d] {
                frame.z[p] ^= true;
            }
            if frame.x[p] {
                frame.z[d] ^= true;
            }
        }
    }
    Ok(())
}

/// End-of-circuit frame for errors present just before step `from_step`.
pub fn propagate(frame: &PauliFrame, schedule: &GateSchedule, from_step: usize) -> Result<PauliFrame> {
    let mut out = frame.clone();
    propagate_in_place(&mut out, schedule, from_step)?;
    Ok(out)
}

/// Global id of the block neighbouring `block` in direction `dir`.
pub fn neighbor(layout: &LatticeLayout, block: u32, dir: Direction) -> Option<u32> {
    let n = layout.neighbors[block as usize][dir.index()];
    (n != NONE).then_some(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner_codes::code;
    use crate::lattice::{build_lattice, Boundary};

    #[test]
    fn step_counts() {
        let lay = build_lattice(3, Boundary::Torus).unwrap();
        let n = |id| schedule_for(code(id), &lay).unwrap().n_steps();
        assert_eq!(n(CodeId::Rep2), 8);
        assert_eq!(n(CodeId::Rep3), 12);
        assert_eq!(n(CodeId::Subsystem4), 4);
        assert_eq!(n(CodeId::Steane7), 4);
        assert_eq!(n(CodeId::Cubic), 4);
        assert_eq!(n(CodeId::Mixed3), 8);
    }

    #[test]
    fn rep2_every_qubit_once_per_step() {
        let lay = build_lattice(3, Boundary::Torus).unwrap();
        let s = schedule_for(code(CodeId::Rep2), &lay).unwrap();
        let nq = s.n_qubits(&lay);
        for step in &s.steps {
            let mut seen = vec![0; nq];
            for g in step {
                seen[g.dual as usize] += 1;
                seen[g.primal as usize] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn gate_counts_per_position() {
        let lay = build_lattice(2, Boundary::Torus).unwrap();
        let g = |id| schedule_for(code(id), &lay).unwrap().gates_per_position();
        assert_eq!(g(CodeId::Subsystem4), vec![4; 4]);
        assert_eq!(g(CodeId::Rep2), vec![8; 2]);
        assert_eq!(g(CodeId::Rep3), vec![12; 3]);
        assert_eq!(g(CodeId::Mixed3), vec![8, 4, 4]);
        let per_edge = |id| schedule_for(code(id), &lay).unwrap().local.iter().flatten().count() / 4;
        assert_eq!(per_edge(CodeId::Rep3), 9);
        assert_eq!(per_edge(CodeId::Mixed3), 4);
    }

    #[test]
    fn z_frames_do_not_move() {
        let lay = build_lattice(3, Boundary::Torus).unwrap();
        let s = schedule_for(code(CodeId::Rep2), &lay).unwrap();
        let mut f = PauliFrame::new(s.n_qubits(&lay));
        f.z[3] = true;
        f.z[40] = true;
        assert_eq!(propagate(&f, &s, 0).unwrap(), f);
        assert!(propagate(&f, &s, 9).is_err());
    }

    #[test]
    fn natural_only_for_rep2() {
        let lay = build_lattice(2, Boundary::Torus).unwrap();
        assert!(schedule_with(code(CodeId::Rep2), &lay, ScheduleKind::Natural).is_ok());
        assert!(schedule_with(code(CodeId::Rep3), &lay, ScheduleKind::Natural).is_err());
    }

    #[test]
    fn rough_boundary_has_idle_blocks() {
        let lay = build_lattice(3, Boundary::RoughZ).unwrap();
        let s = schedule_for(code(CodeId::Cubic), &lay).unwrap();
        assert!((0..4).any(|t| !s.idle_blocks(&lay, t).is_empty()));
        let torus = build_lattice(3, Boundary::Torus).unwrap();
        let s = schedule_for(code(CodeId::Cubic), &torus).unwrap();
        assert!((0..4).all(|t| s.idle_blocks(&torus, t).is_empty()));
    }

    #[test]
    fn json_export_lists_every_step() {
        let lay = build_lattice(2, Boundary::Torus).unwrap();
        let s = schedule_for(code(CodeId::Rep2), &lay).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["steps"].as_array().unwrap().len(), 8);
    }
}
