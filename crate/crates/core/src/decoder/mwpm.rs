//! Minimum-weight perfect matching of defects, optionally with a boundary.
//!
//! Small instances and instances with a boundary use the complete defect
//! graph. Large boundary-free instances start from a k-nearest-neighbour
//! graph and add back every omitted edge whose reduced cost is negative under
//! the final duals, re-solving until the dual certificate covers all pairs.

use super::matching::{max_weight_matching, Matching};
use crate::error::{Error, Result};

/// Partner of a defect in the matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Partner {
    Defect(usize),
    Boundary,
}

/// Instances up to this size always use the complete graph.
const COMPLETE_LIMIT: usize = 64;
const INITIAL_K: usize = 8;

/// Solve the matching. `dist(i, j)` must be symmetric, `bound` must exceed
/// every distance, and `boundary(i)` is the cost of pairing `i` with the
/// boundary when one exists.
pub fn min_weight_pairing(
    n: usize,
    bound: u32,
    dist: &mut dyn FnMut(usize, usize) -> u32,
    boundary: Option<&dyn Fn(usize) -> u32>,
) -> Result<(Vec<Partner>, u64)> {
    if n == 0 {
        return Ok((Vec::new(), 0));
    }
    if boundary.is_none() && n % 2 == 1 {
        return Err(Error::internal(format!("odd number of defects ({n}) without a boundary")));
    }
    let big = bound as i64 + 1;
    let partners = match boundary {
        Some(bd) => solve_with_boundary(n, big, dist, bd)?,
        None if n <= COMPLETE_LIMIT => solve_complete(n, big, dist)?,
        None => solve_sparse(n, big, dist)?,
    };
    let mut total = 0u64;
    for (i, p) in partners.iter().enumerate() {
        match *p {
            Partner::Defect(j) if j > i => total += dist(i, j) as u64,
            Partner::Boundary => total += boundary.map_or(0, |bd| bd(i)) as u64,
            _ => {}
        }
    }
    Ok((partners, total))
}

fn to_partners(n: usize, m: &Matching) -> Result<Vec<Partner>> {
    (0..n)
        .map(|i| match m.mate[i] {
            Some(j) if j < n => Ok(Partner::Defect(j)),
            Some(_) => Ok(Partner::Boundary),
            None => Err(Error::internal("matching is not perfect")),
        })
        .collect()
}

fn solve_complete(n: usize, big: i64, dist: &mut dyn FnMut(usize, usize) -> u32) -> Result<Vec<Partner>> {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, big - dist(i, j) as i64));
        }
    }
    let m = max_weight_matching(n, &edges, true);
    to_partners(n, &m)
}

fn solve_with_boundary(
    n: usize,
    big: i64,
    dist: &mut dyn FnMut(usize, usize) -> u32,
    bd: &dyn Fn(usize) -> u32,
) -> Result<Vec<Partner>> {
    // Defect i has a boundary copy n + i; copies pair among themselves at no
    // cost. Pairs whose direct distance is no better than both going to the
    // boundary are dominated and omitted.
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((i, n + i, big - bd(i) as i64));
        for j in i + 1..n {
            let d = dist(i, j);
            if d < bd(i) + bd(j) {
                edges.push((i, j, big - d as i64));
            }
            edges.push((n + i, n + j, big));
        }
    }
    let m = max_weight_matching(2 * n, &edges, true);
    if m.mate.iter().any(Option::is_none) {
        return Err(Error::internal("boundary matching is not perfect"));
    }
    to_partners(n, &m)
}

fn solve_sparse(n: usize, big: i64, dist: &mut dyn FnMut(usize, usize) -> u32) -> Result<Vec<Partner>> {
    let mut d = vec![0u32; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = dist(i, j);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut k = INITIAL_K.min(n - 1);
    let mut present = vec![false; n * n];
    let mut edges = Vec::new();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    loop {
        for i in 0..n {
            order.clear();
            order.extend((0..n).filter(|&j| j != i));
            order.select_nth_unstable_by_key(k - 1, |&j| (d[i * n + j], j));
            for &j in &order[..k] {
                let (a, b) = (i.min(j), i.max(j));
                if !present[a * n + b] {
                    present[a * n + b] = true;
                    edges.push((a, b, big - d[a * n + b] as i64));
                }
            }
        }
        let m = max_weight_matching(n, &edges, true);
        if m.mate.iter().any(Option::is_none) {
            if k >= n - 1 {
                return Err(Error::internal("complete graph has no perfect matching"));
            }
            k = (2 * k).min(n - 1);
            continue;
        }
        // Pricing: every omitted edge must have non-negative reduced cost.
        let mut added = false;
        for i in 0..n {
            for j in i + 1..n {
                if present[i * n + j] {
                    continue;
                }
                let w = big - d[i * n + j] as i64;
                if m.vertex_dual[i] + m.vertex_dual[j] >= 4 * w {
                    continue;
                }
                if m.slack_for(i, j, w) < 0 {
                    present[i * n + j] = true;
                    edges.push((i, j, w));
                    added = true;
                }
            }
        }
        if !added {
            return to_partners(n, &m);
        }
    }
}

/// Exhaustive minimum over all pairings (with optional boundary), for tests.
pub fn brute_force_pairing(
    n: usize,
    dist: &dyn Fn(usize, usize) -> u32,
    boundary: Option<&dyn Fn(usize) -> u32>,
) -> Option<u64> {
    fn rec(
        rest: &[usize],
        dist: &dyn Fn(usize, usize) -> u32,
        boundary: Option<&dyn Fn(usize) -> u32>,
    ) -> Option<u64> {
        let Some(&first) = rest.first() else { return Some(0) };
        let mut best: Option<u64> = None;
        let remaining: Vec<usize> = rest[1..].to_vec();
        if let Some(bd) = boundary {
            if let Some(v) = rec(&remaining, dist, boundary) {
                best = Some(v + bd(first) as u64);
            }
        }
        for idx in 0..remaining.len() {
            let mut r = remaining.clone();
            let j = r.remove(idx);
            if let Some(v) = rec(&r, dist, boundary) {
                let total = v + dist(first, j) as u64;
                best = Some(best.map_or(total, |b| b.min(total)));
            }
        }
        best
    }
    if boundary.is_none() && n % 2 == 1 {
        return None;
    }
    rec(&(0..n).collect::<Vec<_>>(), dist, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(p: &[Partner]) {
        for (i, &x) in p.iter().enumerate() {
            if let Partner::Defect(j) = x {
                assert_eq!(p[j], Partner::Defect(i));
                assert_ne!(i, j);
            }
        }
    }

    #[test]
    fn complete_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = 2 * rng.gen_range(0..5);
            let pts: Vec<(i32, i32)> = (0..n).map(|_| (rng.gen_range(0..9), rng.gen_range(0..9))).collect();
            let f = |i: usize, j: usize| ((pts[i].0 - pts[j].0).abs() + (pts[i].1 - pts[j].1).abs()) as u32;
            let (p, w) = min_weight_pairing(n, 20, &mut |i, j| f(i, j), None).unwrap();
            check(&p);
            assert_eq!(Some(w), brute_force_pairing(n, &f, None));
        }
    }

    #[test]
    fn boundary_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n = rng.gen_range(0..8);
            let pts: Vec<(i32, i32)> = (0..n).map(|_| (rng.gen_range(0..9), rng.gen_range(0..9))).collect();
            let f = |i: usize, j: usize| ((pts[i].0 - pts[j].0).abs() + (pts[i].1 - pts[j].1).abs()) as u32;
            let bd = |i: usize| (pts[i].1 + 1).min(9 - pts[i].1) as u32;
            let (p, w) = min_weight_pairing(n, 20, &mut |i, j| f(i, j), Some(&bd)).unwrap();
            check(&p);
            assert_eq!(Some(w), brute_force_pairing(n, &f, Some(&bd)));
        }
    }

    #[test]
    fn sparse_matches_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let n = 2 * rng.gen_range(33..80);
            let pts: Vec<(i32, i32, i32)> =
                (0..n).map(|_| (rng.gen_range(0..12), rng.gen_range(0..12), rng.gen_range(0..12))).collect();
            let f = |i: usize, j: usize| {
                let w = |a: i32, b: i32| {
                    let d = (a - b).abs();
                    d.min(12 - d)
                };
                (w(pts[i].0, pts[j].0) + w(pts[i].1, pts[j].1) + w(pts[i].2, pts[j].2)) as u32
            };
            let (p, w) = min_weight_pairing(n, 20, &mut |i, j| f(i, j), None).unwrap();
            check(&p);
            let (_, wc) = {
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        edges.push((i, j, 21 - f(i, j) as i64));
                    }
                }
                let m = max_weight_matching(n, &edges, true);
                let parts = to_partners(n, &m).unwrap();
                let mut t = 0u64;
                for (i, q) in parts.iter().enumerate() {
                    if let Partner::Defect(j) = *q {
                        if j > i {
                            t += f(i, j) as u64;
                        }
                    }
                }
                (parts, t)
            };
            assert_eq!(w, wc);
        }
    }

    #[test]
    fn odd_without_boundary_is_internal_error() {
        let r = min_weight_pairing(3, 5, &mut |_, _| 1, None);
        assert!(matches!(r, Err(Error::Internal(_))));
    }
}
