//! Closed-form rates, finite-size scaling fits, biased-noise counting and
//! overhead estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::GateSchedule;
use crate::error::{Error, Result};
use crate::inner_codes::CodeId;
use crate::lattice::Boundary;
use crate::montecarlo::{Experiment, ResultRow, TrialConfig};
use crate::noise::{NoiseModel, NoiseSpec};

/// Known results per scheme, as fractions (not percent).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReferenceValues {
    pub code: CodeId,
    pub phenomenological: f64,
    pub circuit_level: f64,
    pub biased: f64,
    /// Quoted uncertainty of `biased`.
    pub biased_uncertainty: f64,
    pub nu_phenomenological: f64,
    pub nu_circuit_level: f64,
    /// Spacetime overhead relative to the cubic scheme at p = 1e-3.
    pub overhead_ratio: f64,
}

pub const REFERENCE: [ReferenceValues; 6] = [
    ReferenceValues {
        code: CodeId::Cubic,
        phenomenological: 0.02936,
        circuit_level: 0.005692,
        biased: 0.00734,
        biased_uncertainty: 0.00005,
        nu_phenomenological: 0.92,
        nu_circuit_level: 0.88,
        overhead_ratio: 1.00,
    },
    ReferenceValues {
        code: CodeId::Rep2,
        phenomenological: 0.08034,
        circuit_level: 0.00664,
        biased: 0.01205,
        biased_uncertainty: 0.00001,
        nu_phenomenological: 1.40,
        nu_circuit_level: 1.29,
        overhead_ratio: 0.68,
    },
    ReferenceValues {
        code: CodeId::Rep3,
        phenomenological: 0.1026,
        circuit_level: 0.003216,
        biased: 0.01090,
        biased_uncertainty: 0.00005,
        nu_phenomenological: 1.04,
        nu_circuit_level: 1.04,
        overhead_ratio: 4.74,
    },
    ReferenceValues {
        code: CodeId::Mixed3,
        phenomenological: 0.0566,
        circuit_level: 0.006947,
        biased: 0.0118,
        biased_uncertainty: 0.0005,
        nu_phenomenological: 1.21,
        nu_circuit_level: 1.04,
        overhead_ratio: 1.43,
    },
    ReferenceValues {
        code: CodeId::Subsystem4,
        phenomenological: 0.04195,
        circuit_level: 0.00701,
        biased: 0.0105,
        biased_uncertainty: 0.0001,
        nu_phenomenological: 1.28,
        nu_circuit_level: 1.26,
        overhead_ratio: 1.27,
    },
    ReferenceValues {
        code: CodeId::Steane7,
        phenomenological: 0.04137,
        circuit_level: 0.00678,
        biased: 0.0103,
        biased_uncertainty: 0.0002,
        nu_phenomenological: 1.13,
        nu_circuit_level: 1.06,
        overhead_ratio: 2.40,
    },
];

pub fn reference(code: CodeId) -> &'static ReferenceValues {
    REFERENCE.iter().find(|r| r.code == code).expect("every code has reference values")
}

// ---------------------------------------------------------------------------
// Effective rates

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveRates {
    /// Undetected logical flip rate of an unerased block.
    pub p_pauli: f64,
    pub p_erasure: f64,
}

/// Block-level rates of the [[2,1,1]] code under independent Z flips at `p`.
pub fn effective_rates_211(p: f64) -> Result<EffectiveRates> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::config(format!("p = {p} outside [0, 1)")));
    }
    let p_erasure = 2.0 * p * (1.0 - p);
    Ok(EffectiveRates { p_pauli: p * p / (1.0 - p_erasure), p_erasure })
}

// ---------------------------------------------------------------------------
// Threshold fits

/// One measured logical error rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub p: f64,
    pub l: usize,
    pub p_l: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitErrors {
    pub p_th: f64,
    pub nu: f64,
    #[serde(rename = "A")]
    pub a: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub p_th: f64,
    pub nu: f64,
    /// Polynomial coefficients in the scaled variable `(p - p_th) L^(1/nu)`.
    #[serde(rename = "A")]
    pub a: [f64; 4],
    pub errors: FitErrors,
    pub n_points: usize,
    pub chi2: f64,
    pub residual_norm: f64,
}

impl FitResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }

    pub fn summary(&self) -> String {
        format!(
            "p_th = {:.4}% ± {:.4}%, nu = {:.3} ± {:.3}",
            100.0 * self.p_th,
            100.0 * self.errors.p_th,
            self.nu,
            self.errors.nu
        )
    }

    /// Model value at `(p, l)`.
    pub fn predict(&self, p: f64, l: usize) -> f64 {
        let x = (p - self.p_th) * (l as f64).powf(1.0 / self.nu);
        self.a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Scaling points of one scheme and model from stored results, with the
/// binomial standard error (floored at one failure) as `sigma`.
pub fn scaling_points(rows: &[ResultRow], code: CodeId, model: NoiseModel) -> Vec<ScalingPoint> {
    rows.iter()
        .filter(|r| r.scheme == code && r.model == model)
        .map(|r| ScalingPoint { p: r.p, l: r.l, p_l: r.p_l, sigma: r.stats().sigma() })
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { bootstrap: 200, seed: 0 }
    }
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
fn solve_dense<const N: usize>(mut m: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Best polynomial coefficients and chi-square for fixed `(p_th, nu)`.
fn profile(points: &[ScalingPoint], p_th: f64, nu: f64) -> Option<([f64; 4], f64)> {
    if !(nu > 0.05 && nu < 20.0) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|q| (q.p - p_th) * (q.l as f64).powf(1.0 / nu)).collect();
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let mut ata = [[0.0; 4]; 4];
    let mut atb = [0.0; 4];
    for (q, &x) in points.iter().zip(&xs) {
        let w = 1.0 / (q.sigma * q.sigma);
        let u = x / scale;
        let basis = [1.0, u, u * u, u * u * u];
        for i in 0..4 {
            for j in 0..4 {
                ata[i][j] += w * basis[i] * basis[j];
            }
            atb[i] += w * basis[i] * q.p_l;
        }
    }
    let b = solve_dense(ata, atb)?;
    let a = [b[0], b[1] / scale, b[2] / (scale * scale), b[3] / (scale * scale * scale)];
    let chi2 = points
        .iter()
        .zip(&xs)
        .map(|(q, &x)| {
            let model = a[0] + x * (a[1] + x * (a[2] + x * a[3]));
            ((q.p_l - model) / q.sigma).powi(2)
        })
        .sum();
    Some((a, chi2))
}

/// Nelder-Mead minimization in two dimensions.
fn nelder_mead(f: &dyn Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2], iters: usize) -> ([f64; 2], f64) {
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = simplex.map(f);
    for _ in 0..iters {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);
        let spread = (vals[2] - vals[0]).abs();
        if spread <= 1e-12 * (1.0 + vals[0].abs()) && (simplex[2][0] - simplex[0][0]).abs() < 1e-9 {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along =
            |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let refl = along(-1.0);
        let fr = f(refl);
        if fr < vals[0] {
            let exp = along(-2.0);
            let fe = f(exp);
            if fe < fr {
                simplex[2] = exp;
                vals[2] = fe;
            } else {
                simplex[2] = refl;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = refl;
            vals[2] = fr;
        } else {
            let con = if fr < vals[2] { along(-0.5) } else { along(0.5) };
            let fc = f(con);
            if fc < vals[2].min(fr) {
                simplex[2] = con;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ];
                    vals[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("simplex");
    (simplex[best], vals[best])
}

fn fit_once(points: &[ScalingPoint], starts: &[[f64; 2]], p_span: f64) -> Option<(f64, f64, [f64; 4], f64)> {
    // Parameters: p_th and ln(nu).
    let obj = |v: [f64; 2]| profile(points, v[0], v[1].exp()).map_or(f64::INFINITY, |r| r.1);
    let mut best: Option<([f64; 2], f64)> = None;
    for &s in starts {
        let (mut x, mut fx) = nelder_mead(&obj, s, [0.1 * p_span, 0.2], 400);
        // One restart from the optimum shakes off premature collapse.
        let (x2, fx2) = nelder_mead(&obj, x, [0.02 * p_span, 0.05], 400);
        if fx2 < fx {
            x = x2;
            fx = fx2;
        }
        if fx.is_finite() && best.is_none_or(|b| fx < b.1) {
            best = Some((x, fx));
        }
    }
    let (x, chi2) = best?;
    let (a, _) = profile(points, x[0], x[1].exp())?;
    Some((x[0], x[1].exp(), a, chi2))
}

/// Fit `p_L = sum_i A_i x^i` with `x = (p - p_th) L^(1/nu)` by weighted least
/// squares; errors from a bootstrap over points.
pub fn fit_threshold(points: &[ScalingPoint], opts: FitOptions) -> Result<FitResult> {
    let mut ls: Vec<usize> = points.iter().map(|q| q.l).collect();
    ls.sort_unstable();
    ls.dedup();
    let mut ps: Vec<u64> = points.iter().map(|q| q.p.to_bits()).collect();
    ps.sort_unstable();
    ps.dedup();
    if ls.len() < 3 || ps.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 3 lattice sizes and 4 error rates, got {} and {}",
            ls.len(),
            ps.len()
        )));
    }
    if points.len() <= 6 {
        return Err(Error::Fit(format!("{} points cannot constrain six parameters", points.len())));
    }
    if points.iter().any(|q| !(q.sigma > 0.0) || !q.p_l.is_finite()) {
        return Err(Error::Fit("every point needs a positive sigma".into()));
    }
    let pmin = points.iter().map(|q| q.p).fold(f64::INFINITY, f64::min);
    let pmax = points.iter().map(|q| q.p).fold(f64::NEG_INFINITY, f64::max);
    let span = pmax - pmin;
    let mut starts = Vec::new();
    for i in 1..=5 {
        for nu in [0.8f64, 1.3] {
            starts.push([pmin + span * i as f64 / 6.0, nu.ln()]);
        }
    }
    let (p_th, nu, a, chi2) =
        fit_once(points, &starts, span).ok_or_else(|| Error::Fit("no starting point converged".into()))?;
    if !(pmin..=pmax).contains(&p_th) {
        return Err(Error::Fit(format!(
            "p_th = {p_th:.5} outside the scanned range [{pmin:.5}, {pmax:.5}] (nu = {nu:.3}, chi2 = {chi2:.2})"
        )));
    }
    if !(nu > 0.0) {
        return Err(Error::Fit(format!("non-positive nu = {nu}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut samples: Vec<(f64, f64, [f64; 4])> = Vec::new();
    let start = [[p_th, nu.ln()]];
    for _ in 0..opts.bootstrap {
        let resample: Vec<ScalingPoint> = (0..points.len()).map(|_| points[rng.gen_range(0..points.len())]).collect();
        if let Some((bp, bn, ba, _)) = fit_once(&resample, &start, span) {
            samples.push((bp, bn, ba));
        }
    }
    // Resampling points understates the spread by the fitted degrees of
    // freedom (p_th, nu and four coefficients); inflate to compensate.
    let n = points.len() as f64;
    let inflate = (n / (n - 6.0)).sqrt();
    let sd = |vals: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = vals.collect();
        if v.len() < 2 {
            return f64::NAN;
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        inflate * (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    let errors = FitErrors {
        p_th: sd(&mut samples.iter().map(|s| s.0)),
        nu: sd(&mut samples.iter().map(|s| s.1)),
        a: [0, 1, 2, 3].map(|i| sd(&mut samples.iter().map(|s| s.2[i]))),
    };
    Ok(FitResult { p_th, nu, a, errors, n_points: points.len(), chi2, residual_norm: chi2.sqrt() })
}

// ---------------------------------------------------------------------------
// Biased noise

/// Single-qubit Z contribution (preparation plus measurement) per position.
pub const SINGLE_QUBIT_FACTOR: f64 = 4.0 / 3.0;

/// Per-position multiplier of the equivalent phenomenological flip rate:
/// `2/3` per CZ touching the position plus the single-qubit constant.
pub fn biased_factors(schedule: &GateSchedule) -> Vec<f64> {
    schedule.gates_per_position().into_iter().map(|g| g as f64 * 2.0 / 3.0 + SINGLE_QUBIT_FACTOR).collect()
}

/// The common factor of a code whose positions all see the same rate.
pub fn uniform_factor(schedule: &GateSchedule) -> Option<f64> {
    let f = biased_factors(schedule);
    f.windows(2).all(|w| w[0] == w[1]).then(|| f[0])
}

/// Threshold under biased noise from the phenomenological one, for codes
/// with a uniform factor.
pub fn biased_threshold(schedule: &GateSchedule, phenomenological: Option<f64>) -> Result<f64> {
    let p = phenomenological
        .ok_or_else(|| Error::config(format!("code {} needs a phenomenological threshold first", schedule.code)))?;
    let f = uniform_factor(schedule).ok_or_else(|| {
        Error::config(format!("code {} has position-dependent rates; use the crossing search", schedule.code))
    })?;
    Ok(p / f)
}

#[derive(Clone, Copy, Debug)]
pub struct CrossingSearch {
    pub small_l: usize,
    pub large_l: usize,
    pub trials: u64,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Bisection on the biased rate `p` for the crossing of `p_L` between two
/// lattice sizes, simulating the heterogeneous phenomenological model.
pub fn biased_threshold_by_crossing(code: CodeId, search: CrossingSearch) -> Result<f64> {
    crossing_point(code, NoiseModel::BiasedZ, search)
}

/// Bisection for the rate where `p_L` of the larger lattice overtakes the
/// smaller one, on the torus.
pub fn crossing_point(code: CodeId, model: NoiseModel, search: CrossingSearch) -> Result<f64> {
    let above = |p: f64| -> Result<bool> {
        let mut rates = [0.0f64; 2];
        for (k, &l) in [search.small_l, search.large_l].iter().enumerate() {
            let mut cfg = TrialConfig::new(code, NoiseSpec::new(model, p), l, search.trials);
            cfg.master_seed = search.seed;
            cfg.boundary = Boundary::Torus;
            rates[k] = Experiment::new(cfg)?.run_point()?.p_l;
        }
        // Both zero means far below threshold, not a crossing.
        Ok(rates[1] > rates[0] || (rates[1] == rates[0] && rates[0] > 0.0))
    };
    let (mut lo, mut hi) = (search.lo, search.hi);
    if above(lo)? {
        return Err(Error::Fit(format!("larger lattice already worse at {lo}")));
    }
    if !above(hi)? {
        // Saturated curves can tie at the top; take the first sign change
        // on a geometric grid instead.
        let grid: Vec<f64> = (1..=8).map(|k| lo * (search.hi / search.lo).powf(k as f64 / 8.0)).collect();
        let mut found = None;
        for &p in &grid {
            if above(p)? {
                found = Some(p);
                break;
            }
            lo = p;
        }
        hi = found.ok_or_else(|| Error::Fit(format!("no crossing in [{}, {}]", search.lo, search.hi)))?;
    }
    for _ in 0..search.iterations {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Overhead

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

fn ln_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn check_overhead_args(l: usize, p: f64) -> Result<()> {
    if l < 1 {
        return Err(Error::config("L must be at least 1"));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::config(format!("p = {p} outside [0, 1)")));
    }
    Ok(())
}

fn ln_p_pow(p: f64, e: u64) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * p.ln()
    }
}

/// Leading-order logical rate of the cubic scheme:
/// `L^2 C(L, floor(L/2)) p^floor(L/2)`, in natural log.
pub fn ln_overhead_bcc(l: usize, p: f64) -> Result<f64> {
    check_overhead_args(l, p)?;
    let l = l as u64;
    Ok(2.0 * (l as f64).ln() + ln_binomial(l, l / 2) + ln_p_pow(p, l / 2))
}

pub fn overhead_bcc(l: usize, p: f64) -> Result<f64> {
    Ok(ln_overhead_bcc(l, p)?.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Overhead211 {
    /// Leading-order logical rate, summed over the number of erasures on the
    /// path.
    pub value: f64,
    /// `L^3 C(L, floor(L/2))^2 p^L`.
    pub bound: f64,
    pub ln_value: f64,
    pub ln_bound: f64,
}

/// Leading-order logical rate of the [[2,1,1]] scheme. A length-`L` path
/// with `N` erased blocks fails once a majority `ceil((L-N)/2)` of the rest
/// carry undetected flips (rate `p^2` each); erasures occur at rate `2p`:
/// `L^2 sum_N C(L,N) C(L-N, floor((L-N)/2)) 2^N p^(N + 2 ceil((L-N)/2))`.
pub fn overhead_211(l: usize, p: f64) -> Result<Overhead211> {
    check_overhead_args(l, p)?;
    let lu = l as u64;
    let terms: Vec<f64> = (0..=lu)
        .map(|n| {
            let rest = lu - n;
            ln_binomial(lu, n)
                + ln_binomial(rest, rest / 2)
                + n as f64 * 2f64.ln()
                + ln_p_pow(p, n + 2 * rest.div_ceil(2))
        })
        .collect();
    let ln_value = 2.0 * (l as f64).ln() + ln_sum_exp(&terms);
    let ln_bound = 3.0 * (l as f64).ln() + 2.0 * ln_binomial(lu, lu / 2) + ln_p_pow(p, lu);
    Ok(Overhead211 { value: ln_value.exp(), bound: ln_bound.exp(), ln_value, ln_bound })
}

// ---------------------------------------------------------------------------
// Suppression fits

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuppressionFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Range of lattice sizes the fit was made on.
    pub l_min: f64,
    pub l_max: f64,
}

impl SuppressionFit {
    pub fn ln_p_l(&self, l: f64) -> f64 {
        self.a + self.b * l + self.c * l.powi(3)
    }

    /// Smallest `L > 0` reaching `target`, scanning upward from `l_min / 2`.
    pub fn solve(&self, target: f64) -> Option<f64> {
        let goal = target.ln();
        let f = |l: f64| self.ln_p_l(l) - goal;
        let mut lo = (self.l_min / 2.0).max(1e-3);
        if f(lo) <= 0.0 {
            return Some(lo);
        }
        let step = 0.05;
        let mut hi = lo + step;
        while f(hi) > 0.0 {
            lo = hi;
            hi += step;
            if hi > 100.0 * self.l_max.max(1.0) {
                return None;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// `(L, p_L)` points for a suppression fit. Sizes without failures enter at
/// half a failure, which can only overstate their rate.
pub fn suppression_points(rows: &[ResultRow]) -> Vec<(usize, f64)> {
    rows.iter()
        .filter(|r| r.trials > 0)
        .map(|r| {
            let failures = if r.failures == 0 { 0.5 } else { r.failures as f64 };
            (r.l, failures / r.trials as f64)
        })
        .collect()
}

/// Least squares of `ln p_L` against `a + bL + cL^3`.
pub fn fit_suppression(points: &[(usize, f64)]) -> Result<SuppressionFit> {
    let mut ls: Vec<usize> = points.iter().map(|q| q.0).collect();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 lattice sizes, got {}", ls.len())));
    }
    if points.iter().any(|q| !(q.1 > 0.0)) {
        return Err(Error::Fit("logical rates must be positive".into()));
    }
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    let lmax = *ls.last().expect("non-empty") as f64;
    for &(l, pl) in points {
        let x = l as f64 / lmax;
        let basis = [1.0, x, x.powi(3)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += basis[i] * basis[j];
            }
            atb[i] += basis[i] * pl.ln();
        }
    }
    let s = solve_dense(ata, atb).ok_or_else(|| Error::Fit("singular suppression fit".into()))?;
    Ok(SuppressionFit { a: s[0], b: s[1] / lmax, c: s[2] / lmax.powi(3), l_min: ls[0] as f64, l_max: lmax })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverheadRatio {
    pub ratio: f64,
    pub l_scheme: f64,
    pub l_reference: f64,
    /// Some solution lies outside the fitted lattice sizes.
    pub extrapolated: bool,
}

/// Spacetime volume `s L^2` of a scheme over that of the reference
/// (block size 1) at the same target logical rate.
pub fn overhead_ratio(
    scheme: &SuppressionFit,
    block_size: usize,
    reference: &SuppressionFit,
    target: f64,
) -> Result<OverheadRatio> {
    let ls = scheme.solve(target).ok_or_else(|| Error::Fit(format!("scheme fit never reaches {target}")))?;
    let lr = reference.solve(target).ok_or_else(|| Error::Fit(format!("reference fit never reaches {target}")))?;
    let outside = |f: &SuppressionFit, l: f64| l < f.l_min || l > f.l_max;
    Ok(OverheadRatio {
        ratio: block_size as f64 * ls * ls / (lr * lr),
        l_scheme: ls,
        l_reference: lr,
        extrapolated: outside(scheme, ls) || outside(reference, lr),
    })
}

/// Row of the overhead table.
#[derive(Clone, Debug, Serialize)]
pub struct OverheadRow {
    pub scheme: CodeId,
    pub p: f64,
    pub target: f64,
    pub l_scheme: f64,
    pub l_reference: f64,
    pub ratio: f64,
    pub extrapolated: bool,
}
