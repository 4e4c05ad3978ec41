use bcc_concat::analysis::{
    biased_factors, biased_threshold, effective_rates_211, fit_suppression, fit_threshold, overhead_211, overhead_bcc,
    overhead_ratio, reference, uniform_factor, FitOptions, ScalingPoint,
};
use bcc_concat::circuit::schedule_for;
use bcc_concat::inner_codes::{code, CodeId};
use bcc_concat::lattice::{build_lattice, Boundary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let (u, v): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Points from the ansatz at `(p_th, nu)` with relative Gaussian noise.
fn synthetic(p_th: f64, nu: f64, noise: f64, rng: &mut ChaCha8Rng) -> Vec<ScalingPoint> {
    let a = [0.12, 2.5, 20.0, 40.0];
    let mut pts = Vec::new();
    for i in 0..9 {
        let p = p_th * (0.88 + 0.03 * i as f64);
        for l in [5usize, 7, 9, 11] {
            let x = (p - p_th) * (l as f64).powf(1.0 / nu);
            let exact = a.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            let sigma = noise * exact;
            pts.push(ScalingPoint { p, l, p_l: exact + sigma * gaussian(rng), sigma });
        }
    }
    pts
}

#[test]
fn effective_rates_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let p: f64 = rng.gen_range(0.0..0.5);
        let (mut erased, mut undetected) = (0.0, 0.0);
        for pattern in 0..4u32 {
            let k = pattern.count_ones() as i32;
            let prob = p.powi(k) * (1.0 - p).powi(2 - k);
            match k {
                1 => erased += prob,
                2 => undetected += prob,
                _ => {}
            }
        }
        let r = effective_rates_211(p).unwrap();
        assert!((r.p_erasure - erased).abs() < 1e-15);
        assert!((r.p_pauli - undetected / (1.0 - erased)).abs() < 1e-15);
    }
}

#[test]
fn fit_recovers_synthetic_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts = synthetic(0.03, 1.0, 0.01, &mut rng);
    let fit = fit_threshold(&pts, FitOptions { bootstrap: 50, seed: 1 }).unwrap();
    assert!((fit.p_th - 0.03).abs() < 5e-4, "{}", fit.summary());
    assert!((fit.nu - 1.0).abs() < 0.1, "{}", fit.summary());
    assert_eq!(fit.n_points, 36);
    let json: serde_json::Value = serde_json::from_str(&fit.to_json()).unwrap();
    for key in ["p_th", "nu", "A", "errors", "n_points", "chi2"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn bootstrap_errors_cover_the_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let reps = 40;
    let mut covered = 0;
    for r in 0..reps {
        let pts = synthetic(0.05, 1.3, 0.02, &mut rng);
        let fit = fit_threshold(&pts, FitOptions { bootstrap: 60, seed: r }).unwrap();
        if (fit.p_th - 0.05).abs() <= 2.0 * fit.errors.p_th {
            covered += 1;
        }
    }
    assert!(covered >= 35, "{covered}/{reps} repetitions covered");
}

#[test]
fn fit_rejects_thin_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let pts: Vec<ScalingPoint> =
        synthetic(0.03, 1.0, 0.01, &mut rng).into_iter().filter(|q| q.l != 5 && q.l != 7).collect();
    assert!(fit_threshold(&pts, FitOptions::default()).is_err());
}

#[test]
fn overhead_bounds_are_ordered() {
    for p in [1e-4, 1e-3] {
        for l in 4..=40 {
            let eq10 = overhead_211(l, p).unwrap();
            let eq9 = overhead_bcc(l, p).unwrap();
            assert!(eq10.ln_value <= eq10.ln_bound, "L={l} p={p}");
            assert!(eq10.ln_bound <= eq9.ln(), "L={l} p={p}");
        }
    }
}

#[test]
fn overhead_211_decreases_with_l() {
    for p in [1e-4, 1e-3, 1e-2, 0.04] {
        let vals: Vec<f64> = (6..=40).step_by(2).map(|l| overhead_211(l, p).unwrap().ln_value).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "p={p}");
    }
}

#[test]
fn overhead_bcc_vanishes_with_p() {
    let vals: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&p| overhead_bcc(7, p).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn biased_factors_count_gates() {
    let lay = build_lattice(4, Boundary::Torus).unwrap();
    let expected: [(CodeId, &[f64]); 6] = [
        (CodeId::Cubic, &[4.0]),
        (CodeId::Rep2, &[20.0 / 3.0; 2]),
        (CodeId::Rep3, &[28.0 / 3.0; 3]),
        (CodeId::Mixed3, &[20.0 / 3.0, 4.0, 4.0]),
        (CodeId::Subsystem4, &[4.0; 4]),
        (CodeId::Steane7, &[4.0; 7]),
    ];
    for (id, want) in expected {
        let got = biased_factors(&schedule_for(code(id), &lay).unwrap());
        assert_eq!(got.len(), want.len(), "{id}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{id}: {got:?}");
        }
    }
}

#[test]
fn biased_mapping_is_exact_for_uniform_codes() {
    let lay = build_lattice(4, Boundary::Torus).unwrap();
    for id in CodeId::ALL {
        let sched = schedule_for(code(id), &lay).unwrap();
        let phen = reference(id).phenomenological;
        match uniform_factor(&sched) {
            Some(f) => {
                let b = biased_threshold(&sched, Some(phen)).unwrap();
                assert!((b * f - phen).abs() < 1e-15, "{id}");
            }
            None => assert!(biased_threshold(&sched, Some(phen)).is_err()),
        }
        assert!(biased_threshold(&sched, None).is_err());
    }
    let rep2 = schedule_for(code(CodeId::Rep2), &lay).unwrap();
    let b = biased_threshold(&rep2, Some(0.08034)).unwrap();
    assert!((b - 0.012051).abs() < 1e-6);
}

#[test]
fn suppression_fit_recovers_noisy_free_curves_and_orders_schemes() {
    let curve = |a: f64, b: f64, c: f64| -> Vec<(usize, f64)> {
        (3..=8).map(|l| (l, (a + b * l as f64 + c * (l as f64).powi(3)).exp())).collect()
    };
    let steep = fit_suppression(&curve(-2.0, -1.4, 0.001)).unwrap();
    let shallow = fit_suppression(&curve(-1.0, -0.6, 0.0)).unwrap();
    assert!((steep.b + 1.4).abs() < 1e-9 && (shallow.c).abs() < 1e-9);
    let r = overhead_ratio(&steep, 2, &shallow, 1e-5).unwrap();
    assert!(r.ratio < 1.0, "{r:?}");
    assert!(r.extrapolated);
    assert!(fit_suppression(&curve(-1.0, -0.6, 0.0)[..3]).is_err());
}
