mod common;

use bcc_concat::decoder::{decode_and_judge, BlockReadout, Decoder};
use bcc_concat::lattice::{build_lattice, Boundary, CheckGraph, Sublattice, NONE};
use proptest::prelude::*;

#[test]
fn matching_agrees_with_exhaustive_enumeration() {
    let report = common::matching_oracle(500, 17);
    assert_eq!(report.instances, 500);
    assert!(report.with_erasures > 100, "only {} instances had erasures", report.with_erasures);
    assert!(report.mismatches.is_empty(), "{:#?}", report.mismatches);
}

/// Blocks of a straight loop through check 0 along axis `k` (torus only).
fn axis_loop(g: &CheckGraph, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cur = 0usize;
    loop {
        let (next, b) = g.adj[cur][2 * k + 1];
        out.push(b);
        cur = next as usize;
        if cur == 0 {
            return out;
        }
    }
}

/// Blocks around the xy plaquette with lower corner at `c`.
fn plaquette(g: &CheckGraph, c: usize) -> [u32; 4] {
    let (c1, b1) = g.adj[c][1];
    let (c2, b2) = g.adj[c1 as usize][3];
    let (c3, b3) = g.adj[c2 as usize][0];
    let (_, b4) = g.adj[c3 as usize][2];
    [b1, b2, b3, b4]
}

#[test]
fn exactly_one_axis_loop_crosses_the_cut() {
    let lay = build_lattice(4, Boundary::Torus).unwrap();
    for sub in [Sublattice::Primal, Sublattice::Dual] {
        let g = lay.graph(sub);
        let crossing: Vec<usize> = (0..3)
            .filter(|&k| {
                let mut flips = vec![false; g.n_blocks()];
                for b in axis_loop(g, k) {
                    flips[b as usize] = true;
                }
                assert!(g.syndrome(&flips).iter().all(|&s| !s));
                g.cut_parity(&flips)
            })
            .collect();
        assert_eq!(crossing.len(), 1, "{sub:?}");
        let mut flips = vec![false; g.n_blocks()];
        for b in axis_loop(g, crossing[0]) {
            flips[b as usize] = true;
        }
        let out = Decoder::new(g).decode(g, &flips, &vec![false; g.n_blocks()]).unwrap();
        assert!(out.failure && out.weight == 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Products of plaquettes have no syndrome and never fail.
    #[test]
    fn plaquette_products_are_harmless(l in 3usize..6, picks in prop::collection::vec(any::<u16>(), 1..12)) {
        let lay = build_lattice(l, Boundary::Torus).unwrap();
        let g = lay.graph(Sublattice::Primal);
        let mut flips = vec![false; g.n_blocks()];
        for p in picks {
            for b in plaquette(g, p as usize % g.n_checks) {
                flips[b as usize] ^= true;
            }
        }
        prop_assert!(g.syndrome(&flips).iter().all(|&s| !s));
        prop_assert!(!g.cut_parity(&flips));
        let out = Decoder::new(g).decode(g, &flips, &vec![false; g.n_blocks()]).unwrap();
        prop_assert!(!out.failure);
    }

    /// The correction always clears the syndrome, and its unerased part is
    /// no heavier than the matching weight.
    #[test]
    fn correction_clears_syndrome(
        l in 3usize..6,
        rough in any::<bool>(),
        seed in any::<u64>(),
        p_flip in 0.0f64..0.15,
        p_erase in 0.0f64..0.3,
    ) {
        use rand::{Rng, SeedableRng};
        let boundary = if rough { Boundary::RoughZ } else { Boundary::Torus };
        let lay = build_lattice(l, boundary).unwrap();
        let g = lay.graph(Sublattice::Primal);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let flips: Vec<bool> = (0..g.n_blocks()).map(|_| rng.gen_bool(p_flip)).collect();
        let erased: Vec<bool> = (0..g.n_blocks()).map(|_| rng.gen_bool(p_erase)).collect();
        let readout = BlockReadout { logical_flip: flips.clone(), erased: erased.clone() };
        let out = decode_and_judge(g, &readout, &flips).unwrap();
        let cost = out.correction.iter().zip(&erased).filter(|(&c, &e)| c && !e).count() as u64;
        prop_assert!(cost <= out.weight);
        prop_assert!(out.pairs.iter().all(|&(a, b)| a != NONE && b != NONE));
    }

    /// Without erasures, the weight of a single flip's correction is 1.
    #[test]
    fn single_flip_costs_one(l in 3usize..7, block in any::<u32>()) {
        let lay = build_lattice(l, Boundary::Torus).unwrap();
        let g = lay.graph(Sublattice::Primal);
        let mut flips = vec![false; g.n_blocks()];
        flips[block as usize % g.n_blocks()] = true;
        let out = Decoder::new(g).decode(g, &flips, &vec![false; g.n_blocks()]).unwrap();
        prop_assert_eq!(out.weight, 1);
        prop_assert!(!out.failure);
    }
}
