//! Two-stage decoding: inner detect-and-erase, then outer matching on the
//! cube checks of one sublattice.
//!
//! Erased blocks keep their measured logical flip; the only special treatment
//! of an erasure is that stepping across it costs nothing.

pub mod matching;
pub mod mwpm;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner_codes::InnerCode;
use crate::lattice::{CheckGraph, LatticeLayout, NONE};

pub use mwpm::Partner;

/// Per-block readout of one sublattice.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BlockReadout {
    pub logical_flip: Vec<bool>,
    pub erased: Vec<bool>,
}

impl BlockReadout {
    pub fn from_masks(code: &InnerCode, masks: &[u8]) -> Self {
        let mut r =
            BlockReadout { logical_flip: Vec::with_capacity(masks.len()), erased: Vec::with_capacity(masks.len()) };
        for &m in masks {
            let o = code.decode_mask(m);
            r.logical_flip.push(o.logical_flip);
            r.erased.push(o.detected);
        }
        r
    }
}

/// Inner stage on the primal sublattice from per-physical-qubit Z flips
/// (index `block * s + qubit`).
pub fn inner_stage(layout: &LatticeLayout, code: &InnerCode, z_flips: &[bool]) -> Result<BlockReadout> {
    let n = layout.primal_blocks.len();
    if z_flips.len() != n * code.size {
        return Err(Error::input(format!("expected {} physical flips, got {}", n * code.size, z_flips.len())));
    }
    let masks: Vec<u8> =
        z_flips.chunks(code.size).map(|c| c.iter().enumerate().fold(0u8, |m, (q, &b)| m | ((b as u8) << q))).collect();
    Ok(BlockReadout::from_masks(code, &masks))
}

/// Odd-parity checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DefectSet {
    pub checks: Vec<u32>,
    /// Boundary node ids available to absorb parity.
    pub boundary: Vec<u32>,
}

pub fn outer_syndrome(graph: &CheckGraph, readout: &BlockReadout) -> DefectSet {
    let syn = graph.syndrome(&readout.logical_flip);
    DefectSet {
        checks: (0..graph.n_checks as u32).filter(|&c| syn[c as usize]).collect(),
        boundary: (0..graph.n_boundary as u32).map(|b| graph.n_checks as u32 + b).collect(),
    }
}

/// Endpoint of a distance query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Check(usize),
    Boundary,
}

/// Shortest-path weight where crossing an erased block costs 0 and any
/// other block costs 1.
pub fn pair_distance(graph: &CheckGraph, erased: &[bool], a: usize, b: Target) -> u32 {
    if !erased.iter().any(|&e| e) {
        return match b {
            Target::Check(b) => graph.manhattan(a, b),
            Target::Boundary => graph.boundary_distance(a).map_or(u32::MAX, |x| x.0),
        };
    }
    let mut ws = Workspace::new(graph);
    ws.bfs01(graph, erased, a, Stop::Never);
    match b {
        Target::Check(b) => ws.dist[b],
        Target::Boundary => ws.boundary_hit.map_or(u32::MAX, |x| x.0),
    }
}

/// Result of decoding one sublattice.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DecodeOutcome {
    pub failure: bool,
    pub correction: Vec<bool>,
    /// Total matching weight (0 when every defect pairs through erasures).
    pub weight: u64,
    /// Matched pairs of nodes; boundary nodes use ids `>= n_checks`.
    pub pairs: Vec<(u32, u32)>,
    /// Some erased cluster contains a cycle crossing the cut an odd number
    /// of times, so a zero-cost completion of either parity exists.
    pub ambiguous: bool,
}

/// Decode and judge against the true block flips.
pub fn decode_and_judge(graph: &CheckGraph, readout: &BlockReadout, true_flips: &[bool]) -> Result<DecodeOutcome> {
    let mut dec = Decoder::new(graph);
    let mut out = dec.decode(graph, &readout.logical_flip, &readout.erased)?;
    let mut residual = true_flips.to_vec();
    for (r, &c) in residual.iter_mut().zip(&out.correction) {
        *r ^= c;
    }
    if graph.syndrome(&residual).iter().any(|&s| s) {
        return Err(Error::internal("correction leaves a residual syndrome"));
    }
    out.failure = graph.cut_parity(&residual);
    Ok(out)
}

struct Workspace {
    dist: Vec<u32>,
    parent: Vec<u32>,
    touched: Vec<u32>,
    deque: VecDeque<u32>,
    boundary_hit: Option<(u32, u32)>,
    /// Blocks ending on each boundary node.
    boundary_adj: Vec<Vec<u32>>,
    is_target: Vec<bool>,
}

/// When a search may stop early.
#[derive(Clone, Copy)]
enum Stop<'a> {
    Never,
    At(u32),
    Boundary,
    /// Once every listed check and, if any, a boundary node are settled.
    All(&'a [usize]),
}

impl Workspace {
    fn new(graph: &CheckGraph) -> Self {
        let mut boundary_adj = vec![Vec::new(); graph.n_boundary];
        for (b, ends) in graph.block_ends.iter().enumerate() {
            for &e in ends {
                if graph.is_boundary(e) {
                    boundary_adj[e as usize - graph.n_checks].push(b as u32);
                }
            }
        }
        Workspace {
            dist: vec![u32::MAX; graph.n_nodes()],
            parent: vec![NONE; graph.n_nodes()],
            touched: Vec::new(),
            deque: VecDeque::new(),
            boundary_hit: None,
            boundary_adj,
            is_target: vec![false; graph.n_nodes()],
        }
    }

    /// 0-1 BFS from check `src`. Boundary nodes are sinks; `parent` records
    /// the block used to reach each node. Nodes are settled in order of
    /// distance, so stopping early leaves exact values on settled nodes.
    fn bfs01(&mut self, graph: &CheckGraph, erased: &[bool], src: usize, stop: Stop) {
        for &t in &self.touched {
            self.dist[t as usize] = u32::MAX;
        }
        self.touched.clear();
        self.boundary_hit = None;
        self.deque.clear();
        let mut pending = 0usize;
        let mut need_boundary = false;
        if let Stop::All(targets) = stop {
            for &t in targets {
                self.is_target[t] = true;
            }
            pending = targets.len();
            need_boundary = graph.n_boundary > 0;
        }
        self.dist[src] = 0;
        self.touched.push(src as u32);
        self.deque.push_back(src as u32);
        while let Some(u) = self.deque.pop_front() {
            let du = self.dist[u as usize];
            if graph.is_boundary(u) {
                if self.boundary_hit.is_none_or(|(d, _)| du < d) {
                    self.boundary_hit = Some((du, u));
                }
                need_boundary = false;
                if matches!(stop, Stop::Boundary) || (matches!(stop, Stop::All(_)) && pending == 0) {
                    break;
                }
                continue;
            }
            match stop {
                Stop::At(t) if t == u => break,
                Stop::All(_) if self.is_target[u as usize] => {
                    self.is_target[u as usize] = false;
                    pending -= 1;
                    if pending == 0 && !need_boundary {
                        break;
                    }
                }
                _ => {}
            }
            for &(v, b) in &graph.adj[u as usize] {
                if v == NONE {
                    continue;
                }
                let w = u32::from(!erased[b as usize]);
                let dv = &mut self.dist[v as usize];
                if du + w < *dv {
                    if *dv == u32::MAX {
                        self.touched.push(v);
                    }
                    *dv = du + w;
                    self.parent[v as usize] = b;
                    if w == 0 {
                        self.deque.push_front(v);
                    } else {
                        self.deque.push_back(v);
                    }
                }
            }
        }
        if let Stop::All(targets) = stop {
            for &t in targets {
                self.is_target[t] = false;
            }
        }
    }

    /// Neighbours of any node (boundary nodes included) as `(node, block)`.
    fn for_each_neighbor(&self, graph: &CheckGraph, u: u32, mut f: impl FnMut(u32, u32)) {
        if graph.is_boundary(u) {
            for &b in &self.boundary_adj[u as usize - graph.n_checks] {
                let [x, y] = graph.block_ends[b as usize];
                f(if x == u { y } else { x }, b);
            }
        } else {
            for &(v, b) in &graph.adj[u as usize] {
                if v != NONE {
                    f(v, b);
                }
            }
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
    /// Cut parity of the path to the parent.
    parity: Vec<bool>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), parity: vec![false; n] }
    }

    fn find(&mut self, x: u32) -> (u32, bool) {
        let p = self.parent[x as usize];
        if p == x {
            return (x, false);
        }
        let (root, par) = self.find(p);
        let total = par ^ self.parity[x as usize];
        self.parent[x as usize] = root;
        self.parity[x as usize] = total;
        (root, total)
    }

    /// Join with an edge of the given cut parity. Returns true if the edge
    /// closes a cycle of odd cut parity.
    fn union(&mut self, a: u32, b: u32, cut: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb ^ cut;
        }
        self.parent[ra as usize] = rb;
        self.parity[ra as usize] = pa ^ pb ^ cut;
        false
    }
}

/// Reusable decoder for one check graph.
pub struct Decoder {
    ws: Workspace,
    syn: Vec<bool>,
    /// Per node, the original defect currently sitting there during peeling.
    label: Vec<u32>,
    visited: Vec<bool>,
    order: Vec<u32>,
    tree_parent: Vec<u32>,
}

impl Decoder {
    pub fn new(graph: &CheckGraph) -> Self {
        let n = graph.n_nodes();
        Decoder {
            ws: Workspace::new(graph),
            syn: vec![false; graph.n_checks],
            label: vec![NONE; n],
            visited: vec![false; n],
            order: Vec::new(),
            tree_parent: vec![NONE; n],
        }
    }

    /// Decode block flips with erasures; `failure` is judged against `flips`
    /// themselves (the readout is the true logical flip pattern).
    pub fn decode(&mut self, graph: &CheckGraph, flips: &[bool], erased: &[bool]) -> Result<DecodeOutcome> {
        let nb = graph.n_blocks();
        if flips.len() != nb || erased.len() != nb {
            return Err(Error::input("readout length does not match the check graph"));
        }
        self.syn.iter_mut().for_each(|s| *s = false);
        for (b, &f) in flips.iter().enumerate() {
            if f {
                for &n in &graph.block_ends[b] {
                    if (n as usize) < graph.n_checks {
                        self.syn[n as usize] ^= true;
                    }
                }
            }
        }
        let defects: Vec<usize> = (0..graph.n_checks).filter(|&c| self.syn[c]).collect();
        let mut correction = vec![false; nb];
        let mut pairs = Vec::new();
        let any_erased = erased.iter().any(|&e| e);

        let mut ambiguous = false;
        let mut remaining = defects.clone();
        if any_erased {
            let mut uf = UnionFind::new(graph.n_nodes());
            for b in 0..nb {
                if erased[b] {
                    let [u, v] = graph.block_ends[b];
                    ambiguous |= uf.union(u, v, graph.in_cut[b]);
                }
            }
            if graph.n_boundary == 2 {
                // A cluster reaching both boundaries spans the lattice.
                let (rb, pb) = uf.find(graph.n_checks as u32);
                let (rt, pt) = uf.find(graph.n_checks as u32 + 1);
                if rb == rt && (pb ^ pt) {
                    ambiguous = true;
                }
            }
            remaining = self.peel(graph, erased, &defects, &mut correction, &mut pairs);
        }

        // Exact matching on the rest.
        let n = remaining.len();
        let weight;
        if n > 0 {
            let l = graph.l as u32;
            let bound = 3 * l + 2;
            let mut rows: Vec<Vec<u32>> = Vec::new();
            let mut bdist: Vec<u32> = Vec::new();
            if any_erased {
                for &r in &remaining {
                    self.ws.bfs01(graph, erased, r, Stop::All(&remaining));
                    rows.push(remaining.iter().map(|&s| self.ws.dist[s]).collect());
                    bdist.push(self.ws.boundary_hit.map_or(u32::MAX, |x| x.0));
                }
            } else if graph.n_boundary > 0 {
                bdist = remaining.iter().map(|&r| graph.boundary_distance(r).map_or(u32::MAX, |x| x.0)).collect();
            }
            let rem = &remaining;
            let mut dist = |i: usize, j: usize| -> u32 {
                if any_erased {
                    rows[i][j]
                } else {
                    graph.manhattan(rem[i], rem[j])
                }
            };
            let bd = |i: usize| bdist[i];
            let bref: Option<&dyn Fn(usize) -> u32> = if graph.n_boundary > 0 { Some(&bd) } else { None };
            let (partners, w) = mwpm::min_weight_pairing(n, bound, &mut dist, bref)?;
            weight = w;
            for (i, p) in partners.iter().enumerate() {
                match *p {
                    Partner::Defect(j) if j > i => {
                        self.path(graph, erased, any_erased, rem[i], Target::Check(rem[j]), &mut correction);
                        pairs.push((rem[i] as u32, rem[j] as u32));
                    }
                    Partner::Boundary => {
                        let node = self.path(graph, erased, any_erased, rem[i], Target::Boundary, &mut correction);
                        pairs.push((rem[i] as u32, node));
                    }
                    _ => {}
                }
            }
        } else {
            weight = 0;
        }

        let mut residual_cut = graph.cut_parity(flips);
        residual_cut ^= graph.cut_parity(&correction);
        Ok(DecodeOutcome { failure: residual_cut, correction, weight, pairs, ambiguous })
    }

    /// Pair defects inside each erased cluster at no cost by peeling a
    /// spanning tree of the cluster from its leaves. Clusters touching a
    /// boundary are rooted there and absorb an odd defect. Returns one
    /// check per cluster left with an odd defect.
    fn peel(
        &mut self,
        graph: &CheckGraph,
        erased: &[bool],
        defects: &[usize],
        corr: &mut [bool],
        pairs: &mut Vec<(u32, u32)>,
    ) -> Vec<usize> {
        for &d in defects {
            self.label[d] = d as u32;
        }
        let mut touched = Vec::new();
        let mut remaining = Vec::new();
        let roots = (0..graph.n_boundary as u32).map(|k| graph.n_checks as u32 + k);
        let roots: Vec<u32> = roots.chain(defects.iter().map(|&d| d as u32)).collect();
        for root in roots {
            if self.visited[root as usize] {
                continue;
            }
            self.order.clear();
            self.order.push(root);
            self.visited[root as usize] = true;
            touched.push(root);
            let mut head = 0;
            while head < self.order.len() {
                let u = self.order[head];
                head += 1;
                let mut found = Vec::new();
                self.ws.for_each_neighbor(graph, u, |v, b| {
                    if erased[b as usize] {
                        found.push((v, b));
                    }
                });
                for (v, b) in found {
                    if !self.visited[v as usize] {
                        self.visited[v as usize] = true;
                        touched.push(v);
                        self.tree_parent[v as usize] = b;
                        self.order.push(v);
                    }
                }
            }
            for k in (1..self.order.len()).rev() {
                let u = self.order[k];
                let o = std::mem::replace(&mut self.label[u as usize], NONE);
                if o == NONE {
                    continue;
                }
                let b = self.tree_parent[u as usize];
                corr[b as usize] ^= true;
                let [x, y] = graph.block_ends[b as usize];
                let v = if x == u { y } else { x };
                if graph.is_boundary(v) {
                    pairs.push((o, v));
                } else if self.label[v as usize] != NONE {
                    pairs.push((self.label[v as usize], o));
                    self.label[v as usize] = NONE;
                } else {
                    self.label[v as usize] = o;
                }
            }
            if !graph.is_boundary(root) && self.label[root as usize] != NONE {
                self.label[root as usize] = NONE;
                remaining.push(root as usize);
            }
        }
        for t in touched {
            self.visited[t as usize] = false;
        }
        remaining
    }

    fn walk_back(&self, graph: &CheckGraph, src: u32, mut node: u32, corr: &mut [bool]) {
        while node != src {
            let b = self.ws.parent[node as usize];
            corr[b as usize] ^= true;
            let [u, v] = graph.block_ends[b as usize];
            node = if u == node { v } else { u };
        }
    }

    /// Realize a matched pair as block flips. Returns the end node.
    fn path(
        &mut self,
        graph: &CheckGraph,
        erased: &[bool],
        any_erased: bool,
        a: usize,
        b: Target,
        corr: &mut [bool],
    ) -> u32 {
        if any_erased {
            let stop = match b {
                Target::Check(c) => Stop::At(c as u32),
                Target::Boundary => Stop::Boundary,
            };
            self.ws.bfs01(graph, erased, a, stop);
            let end = match b {
                Target::Check(c) => c as u32,
                Target::Boundary => self.ws.boundary_hit.expect("boundary reachable").1,
            };
            self.walk_back(graph, a as u32, end, corr);
            return end;
        }
        match b {
            Target::Check(c) => {
                axis_path(graph, a, c, corr);
                c as u32
            }
            Target::Boundary => {
                let (_, node) = graph.boundary_distance(a).expect("boundary exists");
                let down = node as usize == graph.n_checks;
                let mut cur = a;
                loop {
                    let (next, blk) = graph.adj[cur][if down { 4 } else { 5 }];
                    corr[blk as usize] ^= true;
                    if graph.is_boundary(next) {
                        return next;
                    }
                    cur = next as usize;
                }
            }
        }
    }
}

/// Axis-ordered shortest path (x, then y, then z; shorter way round, ties
/// going in the positive direction).
fn axis_path(graph: &CheckGraph, a: usize, b: usize, corr: &mut [bool]) {
    let l = graph.l as i64;
    let mut cur = a;
    for k in 0..3 {
        let target = graph.coord[b][k] as i64;
        loop {
            let here = graph.coord[cur][k] as i64;
            if here == target {
                break;
            }
            let mut delta = target - here;
            if graph.periodic[k] {
                delta = delta.rem_euclid(l);
                if delta * 2 > l {
                    delta -= l;
                }
            }
            let slot = 2 * k + usize::from(delta > 0);
            let (next, blk) = graph.adj[cur][slot];
            corr[blk as usize] ^= true;
            cur = next as usize;
        }
    }
}

/// JSON record of one decoded trial.
#[derive(Clone, Debug, Serialize)]
pub struct TrialDump {
    pub flips: Vec<u32>,
    pub erased: Vec<u32>,
    pub defects: Vec<u32>,
    pub pairs: Vec<(u32, u32)>,
    pub correction: Vec<u32>,
    pub weight: u64,
    pub failure: bool,
}

pub fn dump_trial(graph: &CheckGraph, readout: &BlockReadout) -> Result<TrialDump> {
    let out = decode_and_judge(graph, readout, &readout.logical_flip)?;
    let ones = |v: &[bool]| (0..v.len() as u32).filter(|&i| v[i as usize]).collect::<Vec<_>>();
    Ok(TrialDump {
        flips: ones(&readout.logical_flip),
        erased: ones(&readout.erased),
        defects: outer_syndrome(graph, readout).checks,
        pairs: out.pairs,
        correction: ones(&out.correction),
        weight: out.weight,
        failure: out.failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner_codes::lookup;
    use crate::lattice::{build_lattice, Boundary};

    #[test]
    fn clean_readout_never_fails() {
        let lay = build_lattice(3, Boundary::Torus).unwrap();
        let g = &lay.primal;
        let r = BlockReadout { logical_flip: vec![false; g.n_blocks()], erased: vec![false; g.n_blocks()] };
        let out = decode_and_judge(g, &r, &r.logical_flip).unwrap();
        assert!(!out.failure);
        assert!(outer_syndrome(g, &r).checks.is_empty());
    }

    #[test]
    fn single_flip_has_two_defects_and_is_corrected() {
        let lay = build_lattice(4, Boundary::Torus).unwrap();
        let g = &lay.primal;
        for b in 0..g.n_blocks() {
            let mut r = BlockReadout { logical_flip: vec![false; g.n_blocks()], erased: vec![false; g.n_blocks()] };
            r.logical_flip[b] = true;
            assert_eq!(outer_syndrome(g, &r).checks.len(), 2);
            let out = decode_and_judge(g, &r, &r.logical_flip).unwrap();
            assert!(!out.failure);
            assert_eq!(out.weight, 1);
        }
    }

    #[test]
    fn distances() {
        let lay = build_lattice(4, Boundary::Torus).unwrap();
        let g = &lay.primal;
        let (n, b) = g.adj[0][1];
        let mut erased = vec![false; g.n_blocks()];
        assert_eq!(pair_distance(g, &erased, 0, Target::Check(n as usize)), 1);
        assert_eq!(pair_distance(g, &erased, 0, Target::Check(0)), 0);
        erased[b as usize] = true;
        assert_eq!(pair_distance(g, &erased, 0, Target::Check(n as usize)), 0);
    }

    #[test]
    fn inner_stage_examples() {
        let lay = build_lattice(3, Boundary::Torus).unwrap();
        let code = lookup("211").unwrap();
        let n = lay.primal_blocks.len();
        let mut z = vec![false; 2 * n];
        z[2 * 5] = true;
        let r = inner_stage(&lay, code, &z).unwrap();
        assert!(r.erased[5] && r.logical_flip[5]);
        assert_eq!(r.erased.iter().filter(|&&e| e).count(), 1);
        z[2 * 5 + 1] = true;
        let r = inner_stage(&lay, code, &z).unwrap();
        assert!(!r.erased[5] && r.logical_flip[5]);
        assert!(inner_stage(&lay, code, &z[1..]).is_err());
    }

    #[test]
    fn rough_single_flip_near_boundary() {
        let lay = build_lattice(3, Boundary::RoughZ).unwrap();
        let g = &lay.primal;
        for b in 0..g.n_blocks() {
            let mut r = BlockReadout { logical_flip: vec![false; g.n_blocks()], erased: vec![false; g.n_blocks()] };
            r.logical_flip[b] = true;
            let out = decode_and_judge(g, &r, &r.logical_flip).unwrap();
            assert!(!out.failure, "block {b}");
        }
    }
}
