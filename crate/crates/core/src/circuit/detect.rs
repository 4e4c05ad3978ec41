//! Fault enumeration, stabilizer canonicalization and the detectability
//! checker.
//!
//! A fault is convertible when, with no other noise present, the decoder
//! explains its whole outer syndrome by erased blocks alone (matching weight
//! zero), the result is not a logical failure, and the erased blocks contain
//! no cycle crossing the logical cut. Both sublattices are checked.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::{expand, mixed3_schedule, neighbor, propagate_in_place, GateSchedule, ScheduleKind};
use crate::decoder::{BlockReadout, Decoder};
use crate::error::{Error, Result};
use crate::inner_codes::{CodeId, InnerCode};
use crate::lattice::{Direction, LatticeLayout, Sublattice};
use crate::noise::PauliFrame;

/// Z part of an error, per global block.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ZPattern(pub BTreeMap<u32, u8>);

impl ZPattern {
    pub fn from_frame(frame: &PauliFrame, block_size: usize) -> Self {
        let mut m = BTreeMap::new();
        for (q, &z) in frame.z.iter().enumerate() {
            if z {
                *m.entry((q / block_size) as u32).or_insert(0u8) ^= 1 << (q % block_size);
            }
        }
        ZPattern(m)
    }

    pub fn weight(&self) -> u32 {
        self.0.values().map(|m| m.count_ones()).sum()
    }

    pub fn xor(&mut self, other: &ZPattern) {
        for (&b, &m) in &other.0 {
            let e = self.0.entry(b).or_insert(0);
            *e ^= m;
            if *e == 0 {
                self.0.remove(&b);
            }
        }
    }

    fn reduced(&self, code: &InnerCode) -> ZPattern {
        ZPattern(self.0.iter().map(|(&b, &m)| (b, code.reduce_z(m))).filter(|&(_, m)| m != 0).collect())
    }

    fn sort_key(&self) -> (u32, Vec<(u32, u8)>) {
        let support =
            self.0.iter().flat_map(|(&b, &m)| (0..8u8).filter(move |q| m >> q & 1 == 1).map(move |q| (b, q))).collect();
        (self.weight(), support)
    }
}

/// Z part of the cluster stabilizer of `block` at the end of the circuit.
pub fn cluster_stabilizer(layout: &LatticeLayout, schedule: &GateSchedule, code: &InnerCode, block: u32) -> ZPattern {
    let s = code.size;
    let mut frame = PauliFrame::new(schedule.n_qubits(layout));
    for q in 0..s {
        if code.logical_x >> q & 1 == 1 {
            frame.x[block as usize * s + q] = true;
        }
    }
    propagate_in_place(&mut frame, schedule, 0).expect("step 0 is valid");
    ZPattern::from_frame(&frame, s)
}

/// Minimum-weight representative of `pattern` over products of the cluster
/// stabilizers of `generators` and the inner Z stabilizers. Ties go to the
/// lexicographically smallest (block, qubit) support.
pub fn canonicalize(
    pattern: &ZPattern,
    generators: &[u32],
    layout: &LatticeLayout,
    schedule: &GateSchedule,
    code: &InnerCode,
) -> ZPattern {
    let stabs: Vec<ZPattern> = generators.iter().map(|&g| cluster_stabilizer(layout, schedule, code, g)).collect();
    let refs: Vec<&ZPattern> = stabs.iter().collect();
    canonical_with(pattern, &refs, code)
}

/// Render a pattern relative to `center`: `Z_W` for qubit 1 of the W
/// neighbour, `Z_W12` for qubits 1 and 2, `Z_C` for the center and `Z_#id`
/// for any other block. The empty pattern renders as `I`.
pub fn format_pattern(pattern: &ZPattern, center: u32, layout: &LatticeLayout) -> String {
    let label = |b: u32| {
        if b == center {
            return "C".to_string();
        }
        Direction::ALL
            .iter()
            .find(|&&d| neighbor(layout, center, d) == Some(b))
            .map(|d| d.to_string())
            .unwrap_or_else(|| format!("#{b}"))
    };
    let mut parts: Vec<(usize, String)> = pattern
        .0
        .iter()
        .map(|(&b, &m)| {
            let name = label(b);
            let order = match name.as_str() {
                "C" => 0,
                "W" => 1,
                "E" => 2,
                "S" => 3,
                "N" => 4,
                _ => 5,
            };
            let qubits = if m == 1 {
                String::new()
            } else {
                (0..8).filter(|q| m >> q & 1 == 1).map(|q| (q + 1).to_string()).collect()
            };
            (order, format!("Z_{name}{qubits}"))
        })
        .collect();
    parts.sort();
    if parts.is_empty() {
        return "I".to_string();
    }
    parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convertible,
    NotConvertible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FaultKind {
    /// Single-qubit Pauli present just before step `before_step`.
    Qubit { block: u32, qubit: u8, before_step: usize, pauli: char },
    /// Two-qubit Pauli right after the CZ at `step`; `pauli` lists the dual
    /// qubit's factor first.
    Gate { step: usize, dual: u32, primal: u32, pauli: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockSignature {
    pub block: u32,
    pub sublattice: Sublattice,
    pub detected: bool,
    pub logical_flip: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FaultRecord {
    pub fault: FaultKind,
    pub literal: String,
    pub canonical: String,
    pub signature: Vec<BlockSignature>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct FaultReport {
    pub code: CodeId,
    pub schedule: ScheduleKind,
    pub records: Vec<FaultRecord>,
}

impl FaultReport {
    pub fn passes(&self) -> bool {
        self.records.iter().all(|r| r.verdict == Verdict::Convertible)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FaultRecord> {
        self.records.iter().filter(|r| r.verdict == Verdict::NotConvertible)
    }

    pub fn summary(&self) -> String {
        let bad = self.failures().count();
        if bad == 0 {
            "PASS (all 1- and 2-qubit faults convertible)".to_string()
        } else {
            format!("FAIL ({bad} of {} faults not convertible)", self.records.len())
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "code {} schedule {}", self.code, self.schedule);
        let _ = writeln!(out, "{:<34} {:<28} {:<28} verdict", "fault", "literal", "canonical");
        for r in &self.records {
            let fault = match &r.fault {
                FaultKind::Qubit { block, qubit, before_step, pauli } => {
                    format!("{pauli} q{} of #{block} before step {}", qubit + 1, before_step + 1)
                }
                FaultKind::Gate { step, dual, primal, pauli } => {
                    format!("{pauli} after step {} on ({dual},{primal})", step + 1)
                }
            };
            let verdict = match r.verdict {
                Verdict::Convertible => "convertible",
                Verdict::NotConvertible => "NOT convertible",
            };
            let _ = writeln!(out, "{fault:<34} {:<28} {:<28} {verdict}", r.literal, r.canonical);
        }
        let _ = writeln!(out, "{}", self.summary());
        out
    }

    /// The report with its verdict and summary attached.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["passes"] = self.passes().into();
        v["summary"] = self.summary().into();
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

/// First block of a sublattice with all four CZ neighbours.
fn representative(layout: &LatticeLayout, sub: Sublattice) -> Result<u32> {
    layout
        .sublattice_blocks(sub)
        .iter()
        .copied()
        .find(|&b| layout.neighbors[b as usize].iter().all(|&n| n != crate::lattice::NONE))
        .ok_or_else(|| Error::config("layout has no bulk block"))
}

const PAULIS: [(char, bool, bool); 3] = [('X', true, false), ('Y', true, true), ('Z', false, true)];

struct Judge<'a> {
    layout: &'a LatticeLayout,
    code: &'a InnerCode,
    primal: Decoder,
    dual: Decoder,
}

impl<'a> Judge<'a> {
    fn new(layout: &'a LatticeLayout, code: &'a InnerCode) -> Self {
        Judge { layout, code, primal: Decoder::new(&layout.primal), dual: Decoder::new(&layout.dual) }
    }

    fn judge(&mut self, pattern: &ZPattern) -> Result<(Vec<BlockSignature>, Verdict)> {
        let mut sig = Vec::new();
        let mut ok = true;
        for sub in [Sublattice::Primal, Sublattice::Dual] {
            let blocks = self.layout.sublattice_blocks(sub);
            let masks: Vec<u8> = blocks.iter().map(|b| pattern.0.get(b).copied().unwrap_or(0)).collect();
            let readout = BlockReadout::from_masks(self.code, &masks);
            for (i, &m) in masks.iter().enumerate() {
                if m != 0 {
                    sig.push(BlockSignature {
                        block: blocks[i],
                        sublattice: sub,
                        detected: readout.erased[i],
                        logical_flip: readout.logical_flip[i],
                    });
                }
            }
            let graph = self.layout.graph(sub);
            let dec = match sub {
                Sublattice::Primal => &mut self.primal,
                Sublattice::Dual => &mut self.dual,
            };
            let out = dec.decode(graph, &readout.logical_flip, &readout.erased)?;
            ok &= out.weight == 0 && !out.failure && !out.ambiguous;
        }
        Ok((sig, if ok { Verdict::Convertible } else { Verdict::NotConvertible }))
    }
}

/// Enumerate every single-qubit Pauli at every step boundary on a bulk
/// block of each sublattice, and every two-qubit Pauli after every CZ
/// touching those blocks.
pub fn detectability_check(code: &InnerCode, schedule: &GateSchedule, layout: &LatticeLayout) -> Result<FaultReport> {
    if schedule.code != code.id {
        return Err(Error::input("schedule built for a different code"));
    }
    let s = code.size;
    let d_block = representative(layout, Sublattice::Dual)?;
    let p_block = representative(layout, Sublattice::Primal)?;
    let mut stabs: BTreeMap<u32, ZPattern> = BTreeMap::new();
    let mut canon = |pattern: &ZPattern, centers: &[u32]| -> ZPattern {
        let mut gens: Vec<u32> = centers.to_vec();
        for &c in centers {
            gens.extend(Direction::ALL.iter().filter_map(|&d| neighbor(layout, c, d)));
        }
        gens.sort_unstable();
        gens.dedup();
        for &g in &gens {
            stabs.entry(g).or_insert_with(|| cluster_stabilizer(layout, schedule, code, g));
        }
        let list: Vec<&ZPattern> = gens.iter().map(|g| &stabs[g]).collect();
        canonical_with(pattern, &list, code)
    };

    let mut judge = Judge::new(layout, code);
    let mut records = Vec::new();
    let nq = schedule.n_qubits(layout);
    let mut run = |fault: FaultKind, frame: PauliFrame, from: usize, centers: &[u32]| -> Result<()> {
        let mut f = frame;
        propagate_in_place(&mut f, schedule, from)?;
        let literal = ZPattern::from_frame(&f, s);
        let canonical = canon(&literal, centers);
        let (signature, verdict) = judge.judge(&literal)?;
        records.push(FaultRecord {
            fault,
            literal: format_pattern(&literal, centers[0], layout),
            canonical: format_pattern(&canonical, centers[0], layout),
            signature,
            verdict,
        });
        Ok(())
    };

    for block in [d_block, p_block] {
        for q in 0..s {
            for before in 0..=schedule.n_steps() {
                for &(name, x, z) in &PAULIS {
                    let mut f = PauliFrame::new(nq);
                    f.apply(block as usize * s + q, x, z);
                    let fault = FaultKind::Qubit { block, qubit: q as u8, before_step: before, pauli: name };
                    run(fault, f, before, &[block])?;
                }
            }
        }
    }
    for (t, step) in schedule.steps.iter().enumerate() {
        for g in step {
            let (db, pb) = (g.dual / s as u32, g.primal / s as u32);
            if db != d_block && pb != p_block {
                continue;
            }
            for k in 1..16u32 {
                let (dx, dz) = (k & 1 == 1, k & 2 == 2);
                let (px, pz) = (k & 4 == 4, k & 8 == 8);
                let mut f = PauliFrame::new(nq);
                f.apply(g.dual as usize, dx, dz);
                f.apply(g.primal as usize, px, pz);
                let pauli = format!("{}{}", pauli_char(dx, dz), pauli_char(px, pz));
                let fault = FaultKind::Gate { step: t, dual: g.dual, primal: g.primal, pauli };
                run(fault, f, t + 1, &[db, pb])?;
            }
        }
    }
    Ok(FaultReport { code: code.id, schedule: schedule.kind, records })
}

fn pauli_char(x: bool, z: bool) -> char {
    match (x, z) {
        (false, false) => 'I',
        (true, false) => 'X',
        (true, true) => 'Y',
        (false, true) => 'Z',
    }
}

fn canonical_with(pattern: &ZPattern, stabs: &[&ZPattern], code: &InnerCode) -> ZPattern {
    let mut best = pattern.reduced(code);
    let mut best_key = best.sort_key();
    let mut cand = pattern.clone();
    // Gray code walk over all stabilizer products.
    for i in 1u32..(1 << stabs.len()) {
        cand.xor(stabs[i.trailing_zeros() as usize]);
        let r = cand.reduced(code);
        let key = r.sort_key();
        if key < best_key {
            best = r;
            best_key = key;
        }
    }
    best
}

/// One row of the propagated-error table of a schedule.
#[derive(Clone, Debug, Serialize)]
pub struct EffectiveErrorRow {
    /// 1-based step after which the error occurs.
    pub step: usize,
    pub direction: Direction,
    pub error: String,
    pub effective: ZPattern,
    pub rendered: String,
    /// Weight signatures of every member of the stabilizer coset.
    pub signatures: BTreeSet<Signature>,
}

/// Per-block Z weights `[C, W, E, S, N, elsewhere]` around a center block.
pub type Signature = [u32; 6];

/// Weight signature of a pattern, after reducing each block by the inner Z
/// stabilizers.
pub fn signature(pattern: &ZPattern, code: &InnerCode, center: u32, layout: &LatticeLayout) -> Signature {
    let mut sig = [0u32; 6];
    for (&b, &m) in &pattern.0 {
        let w = code.reduce_z(m).count_ones();
        let slot = if b == center {
            0
        } else {
            Direction::ALL.iter().position(|&d| neighbor(layout, center, d) == Some(b)).map_or(5, |k| k + 1)
        };
        sig[slot] += w;
    }
    sig
}

/// Signatures of all products of `pattern` with subsets of `stabs`.
pub fn coset_signatures(
    pattern: &ZPattern,
    stabs: &[&ZPattern],
    code: &InnerCode,
    center: u32,
    layout: &LatticeLayout,
) -> BTreeSet<Signature> {
    let mut out = BTreeSet::new();
    let mut cand = pattern.clone();
    out.insert(signature(&cand, code, center, layout));
    for i in 1u32..(1 << stabs.len()) {
        cand.xor(stabs[i.trailing_zeros() as usize]);
        out.insert(signature(&cand, code, center, layout));
    }
    out
}

/// Propagated effective errors of `X_C`, `X_C Z_P` and `Z_P` after every
/// step, where `C` is qubit 1 of a bulk dual block and `P` is its partner in
/// that step's gate.
pub fn effective_error_table(
    code: &InnerCode,
    schedule: &GateSchedule,
    layout: &LatticeLayout,
) -> Result<Vec<EffectiveErrorRow>> {
    let s = code.size;
    let center = representative(layout, Sublattice::Dual)?;
    let mut gens = vec![center];
    gens.extend(Direction::ALL.iter().filter_map(|&d| neighbor(layout, center, d)));
    let stabs: Vec<ZPattern> = gens.iter().map(|&g| cluster_stabilizer(layout, schedule, code, g)).collect();
    let refs: Vec<&ZPattern> = stabs.iter().collect();
    let nq = schedule.n_qubits(layout);
    let mut rows = Vec::new();
    for (t, local) in schedule.local.iter().enumerate() {
        let Some(g) = local.iter().find(|g| g.dual_qubit == 0) else { continue };
        let partner = neighbor(layout, center, g.direction).expect("bulk block") as usize * s + g.primal_qubit as usize;
        let xc = center as usize * s;
        let label = g.direction.to_string();
        let sub = if g.primal_qubit == 0 { String::new() } else { (g.primal_qubit + 1).to_string() };
        let cases: [(String, Vec<(usize, bool, bool)>); 3] = [
            ("X_C".to_string(), vec![(xc, true, false)]),
            (format!("X_CZ_{label}{sub}"), vec![(xc, true, false), (partner, false, true)]),
            (format!("Z_{label}{sub}"), vec![(partner, false, true)]),
        ];
        for (name, ops) in cases {
            let mut f = PauliFrame::new(nq);
            for (q, x, z) in ops {
                f.apply(q, x, z);
            }
            propagate_in_place(&mut f, schedule, t + 1)?;
            let raw = ZPattern::from_frame(&f, s);
            let eff = canonical_with(&raw, &refs, code);
            rows.push(EffectiveErrorRow {
                signatures: coset_signatures(&raw, &refs, code, center, layout),
                step: t + 1,
                direction: g.direction,
                error: name,
                rendered: format_pattern(&eff, center, layout),
                effective: eff,
            });
        }
    }
    Ok(rows)
}

/// Search the [[3,1,1]]_2 orderings for the first one passing the
/// detectability check: the `d` gates in either round, and every assignment
/// of second-round steps to the `c` gate directions.
pub fn search_mixed3_schedule(layout: &LatticeLayout) -> Result<Option<([usize; 4], usize)>> {
    let code = crate::inner_codes::code(CodeId::Mixed3);
    for d_round in 0..2 {
        for perm in permutations4() {
            let local = mixed3_schedule(perm, d_round);
            let Ok(sched) = expand(code, layout, ScheduleKind::Standard, local) else { continue };
            if detectability_check(code, &sched, layout)?.passes() {
                return Ok(Some((perm, d_round)));
            }
        }
    }
    Ok(None)
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&i| seen[i] = true);
                    if seen.iter().all(|&x| x) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}
