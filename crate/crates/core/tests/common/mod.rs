//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use bcc_concat::circuit::{effective_error_table, schedule_for, EffectiveErrorRow, Signature};
use bcc_concat::decoder::mwpm::brute_force_pairing;
use bcc_concat::decoder::{pair_distance, Decoder, Target};
use bcc_concat::inner_codes::{code, CodeId};
use bcc_concat::lattice::{build_lattice, Boundary, Sublattice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of the matching oracle comparison.
pub struct OracleReport {
    pub instances: usize,
    pub with_erasures: usize,
    pub mismatches: Vec<String>,
}

/// Compare the decoder's matching weight with exhaustive enumeration on
/// random instances of at most 8 defects on small lattices.
pub fn matching_oracle(instances: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport { instances: 0, with_erasures: 0, mismatches: Vec::new() };
    let layouts: Vec<_> = [(3, Boundary::Torus), (4, Boundary::Torus), (3, Boundary::RoughZ), (4, Boundary::RoughZ)]
        .iter()
        .map(|&(l, b)| build_lattice(l, b).unwrap())
        .collect();
    while report.instances < instances {
        let lay = &layouts[rng.gen_range(0..layouts.len())];
        let g = lay.graph(Sublattice::Primal);
        let nb = g.n_blocks();
        let use_erasures = report.instances % 2 == 1;
        let flips: Vec<bool> = (0..nb).map(|_| rng.gen_bool(0.04)).collect();
        let erased: Vec<bool> = (0..nb).map(|_| use_erasures && rng.gen_bool(0.12)).collect();
        let syn = g.syndrome(&flips);
        let defects: Vec<usize> = (0..g.n_checks).filter(|&c| syn[c]).collect();
        if defects.len() > 8 {
            continue;
        }
        report.instances += 1;
        report.with_erasures += usize::from(use_erasures && erased.iter().any(|&e| e));
        let dist = |i: usize, j: usize| pair_distance(g, &erased, defects[i], Target::Check(defects[j]));
        let bd = |i: usize| pair_distance(g, &erased, defects[i], Target::Boundary);
        let bref: Option<&dyn Fn(usize) -> u32> = if g.n_boundary > 0 { Some(&bd) } else { None };
        let expected = brute_force_pairing(defects.len(), &dist, bref);
        let got = Decoder::new(g).decode(g, &flips, &erased);
        match (expected, got) {
            (Some(e), Ok(out)) if e == out.weight => {
                let mut residual = flips.clone();
                for (r, &c) in residual.iter_mut().zip(&out.correction) {
                    *r ^= c;
                }
                if g.syndrome(&residual).iter().any(|&s| s) {
                    report.mismatches.push(format!("instance {}: residual syndrome", report.instances));
                }
            }
            (e, got) => report.mismatches.push(format!(
                "instance {} (L={}, {}, {} defects): exhaustive {:?}, decoder {:?}",
                report.instances,
                lay.l,
                lay.boundary,
                defects.len(),
                e,
                got.map(|o| o.weight)
            )),
        }
    }
    report
}

/// One group of a published propagated-error table: the effective errors of
/// `X_C`, `X_C Z_P` and `Z_P` for one gate step. Entries list the blocks
/// hit, with an optional qubit suffix (`"W12"`), in the W, E, N, S labelling
/// of the published tables.
pub type TableGroup = [&'static [&'static str]; 3];

pub const TYPE_ONE_TABLE: [TableGroup; 4] = [
    [&["W"], &[], &["W"]],
    [&["W"], &["W", "E"], &["E"]],
    [&["W", "E"], &["W", "E", "N"], &["N"]],
    [&["W", "E", "N"], &["W", "E", "N", "S"], &["S"]],
];

pub const REP2_TABLE: [TableGroup; 8] = [
    [&["W"], &[], &["W"]],
    [&["W"], &["W", "E"], &["E"]],
    [&["W", "E"], &["W", "E", "N"], &["N"]],
    [&["W", "E", "N"], &["W", "E", "N", "S"], &["S"]],
    [&["E", "N", "S"], &["W", "E", "N", "S"], &["W"]],
    [&["N", "S"], &["E", "N", "S"], &["E"]],
    [&["S"], &["N", "S"], &["N"]],
    [&["S"], &[], &["S"]],
];

pub const REP3_TABLE: [TableGroup; 12] = [
    [&["W"], &[], &["W"]],
    [&["W"], &["W", "E"], &["E"]],
    [&["W", "E"], &["W", "E", "N"], &["N"]],
    [&["W", "E", "N"], &["W", "E", "N", "S"], &["S"]],
    [&["W", "E", "N", "S"], &["W12", "E", "N", "S"], &["W"]],
    [&["W12", "E", "N", "S"], &["W12", "E12", "N", "S"], &["E"]],
    [&["W", "E", "N", "S12"], &["W", "E", "N12", "S12"], &["N"]],
    [&["W", "E", "N", "S"], &["W", "E", "N", "S12"], &["S"]],
    [&["E", "N", "S"], &["W", "E", "N", "S"], &["W"]],
    [&["S", "N"], &["E", "N", "S"], &["E"]],
    [&["S"], &["S", "N"], &["N"]],
    [&["S"], &[], &["S"]],
];

/// Signature of a table entry. The published N and S labels are the third
/// and fourth gate directions, which are S and N here.
pub fn table_signature(entry: &[&str]) -> Signature {
    let mut sig = [0u32; 6];
    for item in entry {
        let (dir, qubits) = item.split_at(1);
        let slot = match dir {
            "C" => 0,
            "W" => 1,
            "E" => 2,
            "N" => 3,
            "S" => 4,
            other => panic!("bad table label {other}"),
        };
        sig[slot] += if qubits.is_empty() { 1 } else { qubits.len() as u32 };
    }
    sig
}

/// Compare a published table with the propagated errors of a code's
/// schedule. The `X_C` and `X_C Z_P` entries of a group are matched as a
/// pair in either order; an entry matches a row when its signature occurs
/// in the row's stabilizer coset. Returns one message per mismatching group.
pub fn compare_table(id: CodeId, table: &[TableGroup]) -> Vec<String> {
    let lay = build_lattice(4, Boundary::Torus).unwrap();
    let c = code(id);
    let sched = schedule_for(c, &lay).unwrap();
    let rows = effective_error_table(c, &sched, &lay).unwrap();
    let mut problems = Vec::new();
    if rows.len() != 3 * table.len() {
        problems.push(format!("{id}: {} rows for {} groups", rows.len(), table.len()));
        return problems;
    }
    let hit = |row: &EffectiveErrorRow, entry: &[&str]| row.signatures.contains(&table_signature(entry));
    for (k, group) in table.iter().enumerate() {
        let r = &rows[3 * k..3 * k + 3];
        let straight = hit(&r[0], group[0]) && hit(&r[1], group[1]);
        let swapped = hit(&r[0], group[1]) && hit(&r[1], group[0]);
        if !(straight || swapped) || !hit(&r[2], group[2]) {
            problems.push(format!(
                "{id} group {}: table {:?}, ours [{}] [{}] [{}]",
                k + 1,
                group,
                r[0].rendered,
                r[1].rendered,
                r[2].rendered
            ));
        }
    }
    problems
}

/// Signatures present in a set, for diagnostics.
pub fn render_signatures(set: &BTreeSet<Signature>) -> String {
    set.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(" ")
}
