//! Maximum-weight matching on general graphs (Edmonds' blossom algorithm with
//! Galil's O(n^3) bookkeeping), integer weights.
//!
//! Endpoint numbering follows the classic formulation: edge `k` has endpoints
//! `2k` and `2k + 1`; `endpoint[p]` is the vertex at endpoint `p`, and
//! `p ^ 1` is the opposite end.

const NIL: usize = usize::MAX;

/// Result of a matching run. `mate[v]` is the partner of `v` or `None`.
#[derive(Clone, Debug, Default)]
pub struct Matching {
    pub mate: Vec<Option<usize>>,
    /// Final vertex duals, in the doubled-weight scale used internally.
    pub vertex_dual: Vec<i64>,
    /// For every vertex, the chain of enclosing blossom duals summed from the
    /// innermost blossom outwards, paired with the blossom id.
    blossom_parent: Vec<usize>,
    blossom_dual: Vec<i64>,
}

impl Matching {
    /// Sum of duals of the blossoms containing both `u` and `v`.
    pub fn common_blossom_dual(&self, u: usize, v: usize) -> i64 {
        let chain = |mut x: usize| {
            let mut out = Vec::new();
            while self.blossom_parent[x] != NIL {
                x = self.blossom_parent[x];
                out.push(x);
            }
            out
        };
        let (cu, cv) = (chain(u), chain(v));
        cu.iter().filter(|b| cv.contains(b)).map(|&b| self.blossom_dual[b]).sum()
    }

    /// Reduced slack of a potential edge of weight `w`, in the doubled scale:
    /// non-negative iff adding the edge keeps the matching optimal.
    pub fn slack_for(&self, u: usize, v: usize, w: i64) -> i64 {
        self.vertex_dual[u] + self.vertex_dual[v] + 2 * self.common_blossom_dual(u, v) - 4 * w
    }
}

struct State<'a> {
    n: usize,
    edges: &'a [(usize, usize, i64)],
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

fn wrap(j: isize, len: usize) -> usize {
    j.rem_euclid(len as isize) as usize
}

impl<'a> State<'a> {
    fn new(n: usize, edges: &'a [(usize, usize, i64)]) -> Self {
        let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * edges.len());
        let mut neighbend = vec![Vec::new(); n];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut dualvar = vec![maxweight; n];
        dualvar.extend(std::iter::repeat_n(0, n));
        State {
            n,
            edges,
            endpoint,
            neighbend,
            mate: vec![NIL; n],
            label: vec![0; 2 * n],
            labelend: vec![NIL; 2 * n],
            inblossom: (0..n).collect(),
            blossomparent: vec![NIL; 2 * n],
            blossomchilds: vec![Vec::new(); 2 * n],
            blossombase: (0..n).chain(std::iter::repeat_n(NIL, n)).collect(),
            blossomendps: vec![Vec::new(); 2 * n],
            bestedge: vec![NIL; 2 * n],
            blossombestedges: vec![None; 2 * n],
            unusedblossoms: (n..2 * n).collect(),
            dualvar,
            allowedge: vec![false; edges.len()],
            queue: Vec::new(),
        }
    }

    #[inline]
    fn slack(&self, k: usize) -> i64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2 * w
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if t < self.n {
                out.push(t);
            } else {
                stack.extend(self.blossomchilds[t].iter().rev());
            }
        }
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NIL;
        self.bestedge[b] = NIL;
        if t == 1 {
            let leaves = self.leaves(b);
            self.queue.extend(leaves);
        } else {
            let base = self.blossombase[b];
            let mb = self.mate[base];
            debug_assert!(mb != NIL);
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NIL;
        while v != NIL || w != NIL {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NIL {
                v = NIL;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                v = self.endpoint[self.labelend[b]];
            }
            if w != NIL {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("free blossom slot");
        self.blossombase[b] = base;
        self.blossomparent[b] = NIL;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        for leaf in self.leaves_of(&path) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }
        let mut bestedgeto = vec![NIL; 2 * self.n];
        for &sub in &path {
            let lists: Vec<Vec<usize>> = match self.blossombestedges[sub].take() {
                Some(list) => vec![list],
                None => {
                    self.leaves(sub).into_iter().map(|x| self.neighbend[x].iter().map(|p| p / 2).collect()).collect()
                }
            };
            for list in lists {
                for k in list {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NIL || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[sub] = NIL;
        }
        let list: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NIL).collect();
        let mut best = NIL;
        for &k in &list {
            if best == NIL || self.slack(k) < self.slack(best) {
                best = k;
            }
        }
        self.blossombestedges[b] = Some(list);
        self.bestedge[b] = best;
        self.blossomchilds[b] = path;
        self.blossomendps[b] = endps;
    }

    fn leaves_of(&self, subs: &[usize]) -> Vec<usize> {
        subs.iter().flat_map(|&s| self.leaves(s)).collect()
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NIL;
            if s < self.n {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            let len = childs.len();
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = childs.iter().position(|&c| c == entrychild).expect("entry child") as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 == 1 {
                j -= len as isize;
                (1, 0)
            } else {
                (-1, 1)
            };
            let endps = self.blossomendps[b].clone();
            let mut p = self.labelend[b];
            while j != 0 {
                let q = endps[wrap(j - endptrick as isize, len)];
                self.label[self.endpoint[p ^ 1]] = 0;
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[q / 2] = true;
                j += jstep;
                p = endps[wrap(j - endptrick as isize, len)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = childs[wrap(j, len)];
            let x = self.endpoint[p ^ 1];
            self.label[x] = 2;
            self.label[bv] = 2;
            self.labelend[x] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NIL;
            j += jstep;
            while childs[wrap(j, len)] != entrychild {
                let bv = childs[wrap(j, len)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let found = self.leaves(bv).into_iter().find(|&v| self.label[v] != 0);
                if let Some(v) = found {
                    self.label[v] = 0;
                    let m = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[m]] = 0;
                    self.assign_label(v, 2, self.labelend[v]);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NIL;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NIL;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NIL;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.n {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len();
        let i = self.blossomchilds[b].iter().position(|&c| c == t).expect("child");
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 == 1 {
            j -= len as isize;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            let p = self.blossomendps[b][wrap(j - endptrick as isize, len)] ^ endptrick;
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                if bs >= self.n {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NIL {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                if bt >= self.n {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn run(&mut self, maxcardinality: bool) {
        let n = self.n;
        for _ in 0..n {
            self.label.iter_mut().for_each(|x| *x = 0);
            self.bestedge.iter_mut().for_each(|x| *x = NIL);
            for b in n..2 * n {
                self.blossombestedges[b] = None;
            }
            self.allowedge.iter_mut().for_each(|x| *x = false);
            self.queue.clear();
            for v in 0..n {
                if self.mate[v] == NIL && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NIL);
                }
            }
            let mut augmented = false;
            loop {
                while let Some(v) = if augmented { None } else { self.queue.pop() } {
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            let lw = self.label[self.inblossom[w]];
                            if lw == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if lw == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NIL {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NIL || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NIL || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }

                let mut deltatype = 0u8;
                let mut delta = 0i64;
                let mut deltaedge = NIL;
                let mut deltablossom = NIL;
                if !maxcardinality {
                    deltatype = 1;
                    delta = self.dualvar[..n].iter().copied().min().unwrap_or(0);
                }
                for v in 0..n {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NIL {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * n {
                    if self.blossomparent[b] == NIL && self.label[b] == 1 && self.bestedge[b] != NIL {
                        let kslack = self.slack(self.bestedge[b]);
                        debug_assert!(kslack % 2 == 0);
                        let d = kslack / 2;
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NIL
                        && self.blossomparent[b] == NIL
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    deltatype = 1;
                    delta = self.dualvar[..n].iter().copied().min().unwrap_or(0).max(0);
                }

                for v in 0..n {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NIL && self.blossomparent[b] == NIL {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }
            if !augmented {
                break;
            }
            for b in n..2 * n {
                if self.blossomparent[b] == NIL
                    && self.blossombase[b] != NIL
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }
}

/// Maximum-weight matching of the graph on vertices `0..n` with the given
/// undirected weighted edges. With `maxcardinality`, only maximum-cardinality
/// matchings are considered.
pub fn max_weight_matching(n: usize, edges: &[(usize, usize, i64)], maxcardinality: bool) -> Matching {
    // Doubling keeps every blossom dual update integral.
    let doubled: Vec<(usize, usize, i64)> = edges.iter().map(|&(i, j, w)| (i, j, 2 * w)).collect();
    if n == 0 {
        return Matching::default();
    }
    let mut st = State::new(n, &doubled);
    st.run(maxcardinality);
    let mate = st.mate.iter().map(|&p| if p == NIL { None } else { Some(st.endpoint[p]) }).collect();
    Matching {
        mate,
        vertex_dual: st.dualvar[..n].to_vec(),
        blossom_parent: st.blossomparent.clone(),
        blossom_dual: st.dualvar.clone(),
    }
}

/// Minimum-weight perfect matching on a graph with non-negative integer
/// costs. Returns `None` if no perfect matching exists among the edges.
pub fn min_weight_perfect_matching(n: usize, edges: &[(usize, usize, i64)]) -> Option<(Matching, i64)> {
    if n % 2 == 1 {
        return None;
    }
    let offset = edges.iter().map(|e| e.2).max().unwrap_or(0) + 1;
    let weighted: Vec<_> = edges.iter().map(|&(i, j, c)| (i, j, offset - c)).collect();
    let m = max_weight_matching(n, &weighted, true);
    if m.mate.iter().any(Option::is_none) {
        return None;
    }
    let mut cost = 0;
    let mut seen = vec![false; n];
    for (i, j, c) in edges {
        if !seen[*i] && m.mate[*i] == Some(*j) {
            seen[*i] = true;
            seen[*j] = true;
            cost += c;
        }
    }
    Some((m, cost))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mates(m: &Matching) -> Vec<i64> {
        m.mate.iter().map(|x| x.map_or(-1, |v| v as i64)).collect()
    }

    // Cases from the reference implementation's test suite.
    #[test]
    fn small_cases() {
        assert!(max_weight_matching(0, &[], false).mate.is_empty());
        assert_eq!(mates(&max_weight_matching(2, &[(0, 1, 1)], false)), vec![1, 0]);
        assert_eq!(mates(&max_weight_matching(4, &[(1, 2, 10), (2, 3, 11)], false)), vec![-1, -1, 3, 2]);
        assert_eq!(mates(&max_weight_matching(5, &[(1, 2, 5), (2, 3, 11), (3, 4, 5)], false)), vec![-1, -1, 3, 2, -1]);
        assert_eq!(mates(&max_weight_matching(5, &[(1, 2, 5), (2, 3, 11), (3, 4, 5)], true)), vec![-1, 2, 1, 4, 3]);
    }

    #[test]
    fn blossom_cases() {
        let e = [(1, 2, 8), (1, 3, 9), (2, 3, 10), (3, 4, 7)];
        assert_eq!(mates(&max_weight_matching(5, &e, false)), vec![-1, 2, 1, 4, 3]);
        let e = [(1, 2, 8), (1, 3, 9), (2, 3, 10), (3, 4, 7), (1, 6, 5), (4, 5, 6)];
        assert_eq!(mates(&max_weight_matching(7, &e, false)), vec![-1, 6, 3, 2, 5, 4, 1]);
        let e = [(1, 2, 9), (1, 3, 8), (2, 3, 10), (1, 4, 5), (4, 5, 4), (1, 6, 3)];
        assert_eq!(mates(&max_weight_matching(7, &e, false)), vec![-1, 6, 3, 2, 5, 4, 1]);
        let e = [(1, 2, 9), (1, 3, 8), (2, 3, 10), (1, 4, 5), (4, 5, 3), (1, 6, 4)];
        assert_eq!(mates(&max_weight_matching(7, &e, false)), vec![-1, 6, 3, 2, 5, 4, 1]);
        let e = [(1, 2, 9), (1, 3, 8), (2, 3, 10), (1, 4, 5), (4, 5, 3), (3, 6, 4)];
        assert_eq!(mates(&max_weight_matching(7, &e, false)), vec![-1, 2, 1, 6, 5, 4, 3]);
    }

    #[test]
    fn nested_and_expanding_blossoms() {
        let e =
            [(1, 2, 19), (1, 3, 20), (1, 8, 8), (2, 3, 25), (2, 4, 18), (3, 5, 18), (4, 5, 13), (4, 7, 7), (5, 6, 7)];
        assert_eq!(mates(&max_weight_matching(9, &e, false)), vec![-1, 8, 3, 2, 7, 6, 5, 4, 1]);
        let e = [
            (1, 2, 45),
            (1, 5, 45),
            (2, 3, 50),
            (3, 4, 45),
            (4, 5, 50),
            (1, 6, 30),
            (3, 9, 35),
            (4, 8, 35),
            (5, 7, 26),
            (9, 10, 5),
        ];
        assert_eq!(mates(&max_weight_matching(11, &e, false)), vec![-1, 6, 3, 2, 8, 7, 1, 5, 4, 10, 9]);
        let e = [
            (1, 2, 45),
            (1, 5, 45),
            (2, 3, 50),
            (3, 4, 45),
            (4, 5, 50),
            (1, 6, 30),
            (3, 9, 35),
            (4, 8, 26),
            (5, 7, 40),
            (9, 10, 5),
        ];
        assert_eq!(mates(&max_weight_matching(11, &e, false)), vec![-1, 6, 3, 2, 8, 7, 1, 5, 4, 10, 9]);
        let e = [
            (1, 2, 45),
            (1, 5, 45),
            (2, 3, 50),
            (3, 4, 45),
            (4, 5, 50),
            (1, 6, 30),
            (3, 9, 35),
            (4, 8, 28),
            (5, 7, 26),
            (9, 10, 5),
        ];
        assert_eq!(mates(&max_weight_matching(11, &e, false)), vec![-1, 6, 3, 2, 8, 7, 1, 5, 4, 10, 9]);
        let e = [
            (1, 2, 45),
            (1, 7, 45),
            (2, 3, 50),
            (3, 4, 45),
            (4, 5, 95),
            (4, 6, 94),
            (5, 6, 94),
            (6, 7, 50),
            (1, 8, 30),
            (3, 11, 35),
            (5, 9, 36),
            (7, 10, 26),
            (11, 12, 5),
        ];
        assert_eq!(mates(&max_weight_matching(13, &e, false)), vec![-1, 8, 3, 2, 6, 9, 4, 10, 1, 5, 7, 12, 11]);
        let e = [
            (1, 2, 40),
            (1, 3, 40),
            (2, 3, 60),
            (2, 4, 55),
            (3, 5, 55),
            (4, 5, 50),
            (1, 8, 15),
            (5, 7, 30),
            (7, 6, 10),
            (8, 10, 10),
            (4, 9, 30),
        ];
        assert_eq!(mates(&max_weight_matching(11, &e, false)), vec![-1, 2, 1, 5, 9, 3, 7, 6, 10, 4, 8]);
    }

    #[test]
    fn min_weight_perfect_on_square() {
        let e = [(0, 1, 1), (1, 2, 5), (2, 3, 1), (3, 0, 5), (0, 2, 3), (1, 3, 3)];
        let (m, cost) = min_weight_perfect_matching(4, &e).unwrap();
        assert_eq!(cost, 2);
        assert_eq!(m.mate[0], Some(1));
    }

    #[test]
    fn perfect_matching_absent() {
        assert!(min_weight_perfect_matching(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).is_none());
        assert!(min_weight_perfect_matching(3, &[(0, 1, 1)]).is_none());
    }
}
