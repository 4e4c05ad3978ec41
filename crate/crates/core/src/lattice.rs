//! Geometry of the bcc cluster-state lattice.
//!
//! Sites live on the integer grid modulo `2L`. A site with exactly two odd
//! coordinates is a primal block (a face of the primal cubic lattice), one odd
//! coordinate is a dual block (an edge), three odd coordinates is the center
//! of a primal cube check and all-even is the center of a dual cube check.
//! CZ edges join sites at distance one.
//!
//! With [`Boundary::RoughZ`] the x and y axes stay periodic and z runs over
//! `0..=2L`. The primal faces in the planes `z = 0` and `z = 2L` then border
//! a single cube and connect it to a virtual boundary node.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel for an absent neighbor slot.
pub const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    #[serde(rename = "torus")]
    Torus,
    #[serde(rename = "periodic_xy_rough_z")]
    RoughZ,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Torus => "torus",
            Boundary::RoughZ => "periodic_xy_rough_z",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(Boundary::Torus),
            "periodic_xy_rough_z" | "rough_z" => Ok(Boundary::RoughZ),
            _ => Err(Error::config(format!("unknown boundary '{s}' (expected torus or periodic_xy_rough_z)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sublattice {
    Primal,
    Dual,
}

/// Local direction label of a CZ edge. Both endpoints of an edge carry the
/// same label, so a schedule keyed on it is consistent across the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    W = 0,
    E = 1,
    S = 2,
    N = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::W, Direction::E, Direction::S, Direction::N];

    pub fn from_index(i: usize) -> Direction {
        Direction::ALL[i]
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub coord: [u32; 3],
    pub sublattice: Sublattice,
    /// Position among the blocks of the same sublattice.
    pub sub_index: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CzEdge {
    pub primal: u32,
    pub dual: u32,
    pub direction: Direction,
}

/// Cube checks of one sublattice viewed as a graph: checks are nodes and
/// blocks are edges. Block indices are local to the sublattice.
#[derive(Clone, Debug, Serialize)]
pub struct CheckGraph {
    pub sublattice: Sublattice,
    pub l: usize,
    pub n_checks: usize,
    /// 0 on the torus, 2 (bottom then top) for the rough primal lattice.
    /// Boundary node ids follow the checks: `n_checks`, `n_checks + 1`.
    pub n_boundary: usize,
    /// Per check, `(neighbor node, block)` along -x,+x,-y,+y,-z,+z.
    pub adj: Vec<[(u32, u32); 6]>,
    /// Per block, its two end nodes (a check or a boundary node).
    pub block_ends: Vec<[u32; 2]>,
    /// Per check, cell coordinates in `0..L` (z may reach `L` for rough dual).
    pub coord: Vec<[u32; 3]>,
    pub periodic: [bool; 3],
    /// Per block, membership of the logical cut membrane.
    pub in_cut: Vec<bool>,
}

impl CheckGraph {
    pub fn n_blocks(&self) -> usize {
        self.block_ends.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_checks + self.n_boundary
    }

    pub fn is_boundary(&self, node: u32) -> bool {
        node as usize >= self.n_checks
    }

    /// Blocks incident to a check.
    pub fn check_blocks(&self, check: usize) -> impl Iterator<Item = u32> + '_ {
        self.adj[check].iter().filter(|e| e.1 != NONE).map(|e| e.1)
    }

    /// Odd-parity checks of a block flip pattern.
    pub fn syndrome(&self, flips: &[bool]) -> Vec<bool> {
        let mut syn = vec![false; self.n_checks];
        for (b, &f) in flips.iter().enumerate() {
            if f {
                for &n in &self.block_ends[b] {
                    if (n as usize) < self.n_checks {
                        syn[n as usize] ^= true;
                    }
                }
            }
        }
        syn
    }

    pub fn cut_parity(&self, flips: &[bool]) -> bool {
        flips.iter().zip(&self.in_cut).filter(|(&f, &c)| f && c).count() % 2 == 1
    }

    /// Lattice distance between two checks ignoring erasures.
    pub fn manhattan(&self, a: usize, b: usize) -> u32 {
        let (ca, cb) = (self.coord[a], self.coord[b]);
        let l = self.l as u32;
        (0..3)
            .map(|k| {
                let d = ca[k].abs_diff(cb[k]);
                if self.periodic[k] {
                    d.min(l - d)
                } else {
                    d
                }
            })
            .sum()
    }

    /// Distance from a check to the nearest boundary node, with the node id.
    pub fn boundary_distance(&self, a: usize) -> Option<(u32, u32)> {
        if self.n_boundary == 0 {
            return None;
        }
        let z = self.coord[a][2];
        let bottom = z + 1;
        let top = self.l as u32 - z;
        if bottom <= top {
            Some((bottom, self.n_checks as u32))
        } else {
            Some((top, self.n_checks as u32 + 1))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeLayout {
    pub l: usize,
    pub boundary: Boundary,
    /// All blocks, ordered lexicographically by (z, y, x).
    pub blocks: Vec<Block>,
    /// Global ids of the primal blocks, in sublattice order.
    pub primal_blocks: Vec<u32>,
    pub dual_blocks: Vec<u32>,
    pub cz_edges: Vec<CzEdge>,
    /// Per global block, its CZ neighbor (global id) by direction.
    pub neighbors: Vec<[u32; 4]>,
    pub primal: CheckGraph,
    pub dual: CheckGraph,
}

struct Grid {
    l: usize,
    dims: [usize; 3],
    periodic: [bool; 3],
}

impl Grid {
    fn wrap(&self, c: [i64; 3]) -> Option<[u32; 3]> {
        let mut out = [0u32; 3];
        for k in 0..3 {
            let n = self.dims[k] as i64;
            let v = if self.periodic[k] { c[k].rem_euclid(n) } else { c[k] };
            if v < 0 || v >= n {
                return None;
            }
            out[k] = v as u32;
        }
        Some(out)
    }

    fn linear(&self, c: [u32; 3]) -> usize {
        (c[2] as usize * self.dims[1] + c[1] as usize) * self.dims[0] + c[0] as usize
    }

    fn sites(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        let [nx, ny, nz] = self.dims;
        (0..nz).flat_map(move |z| (0..ny).flat_map(move |y| (0..nx).map(move |x| [x as u32, y as u32, z as u32])))
    }

    /// Signed displacement `a - b` along axis `k` for neighboring sites.
    fn delta(&self, a: u32, b: u32, k: usize) -> i64 {
        let n = self.dims[k] as i64;
        let mut d = a as i64 - b as i64;
        if self.periodic[k] {
            if d > n / 2 {
                d -= n;
            } else if d < -(n / 2) {
                d += n;
            }
        }
        d
    }
}

fn odd_count(c: [u32; 3]) -> u32 {
    c.iter().map(|v| v & 1).sum()
}

/// Direction class of the edge between a primal and a dual site.
fn edge_direction(grid: &Grid, primal: [u32; 3], dual: [u32; 3]) -> Direction {
    let a = (0..3).find(|&k| dual[k] & 1 == 1).expect("dual site has one odd axis");
    let k = (0..3).find(|&k| primal[k] != dual[k]).expect("distinct sites");
    let second = k == (a + 2) % 3;
    let positive = grid.delta(primal[k], dual[k], k) > 0;
    Direction::from_index(2 * second as usize + positive as usize)
}

/// Build the layout for linear size `l`.
pub fn build_lattice(l: usize, boundary: Boundary) -> Result<LatticeLayout> {
    if l < 2 {
        return Err(Error::config(format!("lattice size L must be at least 2, got {l}")));
    }
    if l > 512 {
        return Err(Error::config(format!("lattice size L={l} is too large")));
    }
    let grid = match boundary {
        Boundary::Torus => Grid { l, dims: [2 * l; 3], periodic: [true; 3] },
        Boundary::RoughZ => Grid { l, dims: [2 * l, 2 * l, 2 * l + 1], periodic: [true, true, false] },
    };

    let mut site_block = vec![NONE; grid.dims.iter().product()];
    let mut blocks = Vec::new();
    let mut primal_blocks = Vec::new();
    let mut dual_blocks = Vec::new();
    for c in grid.sites() {
        let sub = match odd_count(c) {
            2 => Sublattice::Primal,
            1 => Sublattice::Dual,
            _ => continue,
        };
        let id = blocks.len() as u32;
        let list = if sub == Sublattice::Primal { &mut primal_blocks } else { &mut dual_blocks };
        blocks.push(Block { coord: c, sublattice: sub, sub_index: list.len() as u32 });
        list.push(id);
        site_block[grid.linear(c)] = id;
    }

    let mut neighbors = vec![[NONE; 4]; blocks.len()];
    let mut cz_edges = Vec::new();
    for &p in &primal_blocks {
        let pc = blocks[p as usize].coord;
        for k in 0..3 {
            if pc[k] & 1 == 0 {
                continue;
            }
            for step in [-1i64, 1] {
                let mut c = pc.map(i64::from);
                c[k] += step;
                let Some(dc) = grid.wrap(c) else { continue };
                let d = site_block[grid.linear(dc)];
                let dir = edge_direction(&grid, pc, dc);
                if neighbors[p as usize][dir.index()] != NONE || neighbors[d as usize][dir.index()] != NONE {
                    return Err(Error::internal(format!("direction clash at block {p}")));
                }
                neighbors[p as usize][dir.index()] = d;
                neighbors[d as usize][dir.index()] = p;
                cz_edges.push(CzEdge { primal: p, dual: d, direction: dir });
            }
        }
    }
    cz_edges.sort_by_key(|e| (e.dual, e.direction));

    let primal = check_graph(&grid, &blocks, &site_block, Sublattice::Primal, primal_blocks.len());
    let dual = check_graph(&grid, &blocks, &site_block, Sublattice::Dual, dual_blocks.len());

    Ok(LatticeLayout { l, boundary, blocks, primal_blocks, dual_blocks, cz_edges, neighbors, primal, dual })
}

fn check_graph(grid: &Grid, blocks: &[Block], site_block: &[u32], sub: Sublattice, n_blocks: usize) -> CheckGraph {
    let center_parity = match sub {
        Sublattice::Primal => 3,
        Sublattice::Dual => 0,
    };
    let mut site_check = vec![NONE; site_block.len()];
    let mut coord = Vec::new();
    for c in grid.sites() {
        if odd_count(c) == center_parity {
            site_check[grid.linear(c)] = coord.len() as u32;
            coord.push(c.map(|v| v / 2));
        }
    }
    let n_checks = coord.len();
    let rough_primal = sub == Sublattice::Primal && !grid.periodic[2];
    let n_boundary = if rough_primal { 2 } else { 0 };

    let mut adj = vec![[(NONE, NONE); 6]; n_checks];
    let mut block_ends = vec![[NONE; 2]; n_blocks];
    let mut ends_filled = vec![0u8; n_blocks];
    for c in grid.sites() {
        let id = site_check[grid.linear(c)];
        if id == NONE {
            continue;
        }
        for k in 0..3 {
            for (s, step) in [-1i64, 1].into_iter().enumerate() {
                let mut bc = c.map(i64::from);
                bc[k] += step;
                let Some(bc) = grid.wrap(bc) else { continue };
                let b = blocks[site_block[grid.linear(bc)] as usize].sub_index;
                let mut nc = c.map(i64::from);
                nc[k] += 2 * step;
                let nbr = match grid.wrap(nc) {
                    Some(nc) => site_check[grid.linear(nc)],
                    None if rough_primal => n_checks as u32 + (step > 0) as u32,
                    None => NONE,
                };
                adj[id as usize][2 * k + s] = (nbr, b);
                let slot = &mut ends_filled[b as usize];
                if *slot < 2 && !block_ends[b as usize].contains(&id) {
                    block_ends[b as usize][*slot as usize] = id;
                    *slot += 1;
                }
            }
        }
    }
    // Blocks with a single check: rough faces hang on a boundary node.
    for (b, ends) in block_ends.iter_mut().enumerate() {
        if ends_filled[b] == 1 {
            let check = ends[0] as usize;
            let node = adj[check].iter().find(|e| e.1 == b as u32).map(|e| e.0).unwrap_or(NONE);
            ends[1] = node;
        }
    }

    let in_cut = blocks
        .iter()
        .filter(|b| b.sublattice == sub)
        .map(|b| {
            let [x, y, z] = b.coord;
            match sub {
                Sublattice::Primal => z == 0 && x & 1 == 1 && y & 1 == 1,
                Sublattice::Dual => x == 1 && y & 1 == 0 && z & 1 == 0,
            }
        })
        .collect();

    CheckGraph {
        sublattice: sub,
        l: grid.l,
        n_checks,
        n_boundary,
        adj,
        block_ends,
        coord,
        periodic: grid.periodic,
        in_cut,
    }
}

impl LatticeLayout {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn graph(&self, sub: Sublattice) -> &CheckGraph {
        match sub {
            Sublattice::Primal => &self.primal,
            Sublattice::Dual => &self.dual,
        }
    }

    pub fn sublattice_blocks(&self, sub: Sublattice) -> &[u32] {
        match sub {
            Sublattice::Primal => &self.primal_blocks,
            Sublattice::Dual => &self.dual_blocks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout serializes")
    }
}
