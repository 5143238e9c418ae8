//! Maximum-weight matching on general graphs.
//!
//! A port of the classic O(n^3) blossom algorithm in the formulation by
//! Galil ("Efficient algorithms for finding maximum matching in graphs",
//! 1986), structured after van Rantwijk's widely used reference
//! implementation. All dual arithmetic is exact 128-bit integer, so equality
//! comparisons (allowed edges, zero slack) are exact and results are fully
//! deterministic for a given edge order.
//!
//! With `max_cardinality` the matching maximizes cardinality first and
//! weight among maximum matchings second, which is what reductions of
//! minimum-weight perfect matching to negated weights require.

/// Compute a maximum-weight matching. Returns, per vertex, the matched
/// partner vertex or -1. Edges are (u, v, weight) with u != v; parallel
/// edges are permitted (the best one wins).
pub fn max_weight_matching(
    num_vertices: usize,
    edges: &[(u32, u32, i128)],
    max_cardinality: bool,
) -> Vec<i32> {
    if num_vertices == 0 || edges.is_empty() {
        return vec![-1; num_vertices];
    }
    let mut m = Matcher::new(num_vertices, edges, max_cardinality);
    m.run();
    m.mate
        .iter()
        .map(|&p| if p < 0 { -1 } else { m.endpoint[p as usize] as i32 })
        .collect()
}

const LABEL_FREE: u8 = 0;
const LABEL_S: u8 = 1;
const LABEL_T: u8 = 2;

struct Matcher<'e> {
    n: usize,
    edges: &'e [(u32, u32, i128)],
    max_cardinality: bool,
    /// endpoint[p]: the vertex at endpoint p; endpoints 2k and 2k+1 belong
    /// to edge k.
    endpoint: Vec<u32>,
    /// neighbend[v]: remote endpoints of edges incident to v.
    neighbend: Vec<Vec<u32>>,
    /// mate[v]: remote endpoint of the matched edge, or -1.
    mate: Vec<i32>,
    /// label[b] for vertices and blossoms: free, S, or T. scan_blossom
    /// temporarily sets bit 2 as a breadcrumb.
    label: Vec<u8>,
    /// labelend[b]: endpoint through which the label was acquired, or -1.
    labelend: Vec<i32>,
    /// inblossom[v]: top-level blossom containing vertex v.
    inblossom: Vec<u32>,
    blossomparent: Vec<i32>,
    blossomchilds: Vec<Vec<u32>>,
    blossombase: Vec<i32>,
    blossomendps: Vec<Vec<u32>>,
    /// bestedge[b]: least-slack edge to a different S-blossom (delta
    /// bookkeeping).
    bestedge: Vec<i32>,
    blossombestedges: Vec<Option<Vec<u32>>>,
    unusedblossoms: Vec<u32>,
    dualvar: Vec<i128>,
    allowedge: Vec<bool>,
    queue: Vec<u32>,
}

impl<'e> Matcher<'e> {
    fn new(n: usize, edges: &'e [(u32, u32, i128)], max_cardinality: bool) -> Self {
        let m = edges.len();
        let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * m);
        let mut neighbend: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            debug_assert!(i != j && (i as usize) < n && (j as usize) < n);
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i as usize].push(2 * k as u32 + 1);
            neighbend[j as usize].push(2 * k as u32);
        }
        let mut dualvar = vec![maxweight; n];
        dualvar.extend(std::iter::repeat_n(0, n));
        Matcher {
            n,
            edges,
            max_cardinality,
            endpoint,
            neighbend,
            mate: vec![-1; n],
            label: vec![LABEL_FREE; 2 * n],
            labelend: vec![-1; 2 * n],
            inblossom: (0..n as u32).collect(),
            blossomparent: vec![-1; 2 * n],
            blossomchilds: vec![Vec::new(); 2 * n],
            blossombase: (0..n as i32).chain(std::iter::repeat_n(-1, n)).collect(),
            blossomendps: vec![Vec::new(); 2 * n],
            bestedge: vec![-1; 2 * n],
            blossombestedges: vec![None; 2 * n],
            unusedblossoms: (n as u32..2 * n as u32).collect(),
            dualvar,
            allowedge: vec![false; m],
            queue: Vec::new(),
        }
    }

    #[inline]
    fn slack(&self, k: usize) -> i128 {
        let (i, j, wt) = self.edges[k];
        self.dualvar[i as usize] + self.dualvar[j as usize] - 2 * wt
    }

    fn blossom_leaves(&self, b: usize, out: &mut Vec<u32>) {
        if b < self.n {
            out.push(b as u32);
        } else {
            for &c in &self.blossomchilds[b] {
                self.blossom_leaves(c as usize, out);
            }
        }
    }

    fn assign_label(&mut self, w: usize, t: u8, p: i32) {
        let b = self.inblossom[w] as usize;
        debug_assert!(self.label[w] == LABEL_FREE && self.label[b] == LABEL_FREE);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = -1;
        self.bestedge[b] = -1;
        if t == LABEL_S {
            let mut leaves = Vec::new();
            self.blossom_leaves(b, &mut leaves);
            self.queue.extend(leaves);
        } else if t == LABEL_T {
            let base = self.blossombase[b] as usize;
            debug_assert!(self.mate[base] >= 0);
            let mate_ep = self.mate[base];
            self.assign_label(
                self.endpoint[mate_ep as usize] as usize,
                LABEL_S,
                mate_ep ^ 1,
            );
        }
    }

    /// Trace back from v and w to discover either a new blossom base or an
    /// augmenting path (-1).
    fn scan_blossom(&mut self, v: usize, w: usize) -> i32 {
        let mut path: Vec<u32> = Vec::new();
        let mut base: i32 = -1;
        let mut v: i32 = v as i32;
        let mut w: i32 = w as i32;
        while v != -1 || w != -1 {
            let mut b = self.inblossom[v as usize] as usize;
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], LABEL_S);
            path.push(b as u32);
            self.label[b] = 5;
            debug_assert_eq!(self.labelend[b], self.mate[self.blossombase[b] as usize]);
            if self.labelend[b] == -1 {
                v = -1;
            } else {
                v = self.endpoint[self.labelend[b] as usize] as i32;
                b = self.inblossom[v as usize] as usize;
                debug_assert_eq!(self.label[b], LABEL_T);
                debug_assert!(self.labelend[b] >= 0);
                v = self.endpoint[self.labelend[b] as usize] as i32;
            }
            if w != -1 {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for &b in &path {
            self.label[b as usize] = LABEL_S;
        }
        base
    }

    /// Construct a new blossom with the given base, through S-vertices v and
    /// w of edge k.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (v, w, _) = self.edges[k];
        let bb = self.inblossom[base] as usize;
        let mut bv = self.inblossom[v as usize] as usize;
        let mut bw = self.inblossom[w as usize] as usize;
        let b = self.unusedblossoms.pop().expect("free blossom slot") as usize;
        self.blossombase[b] = base as i32;
        self.blossomparent[b] = -1;
        self.blossomparent[bb] = b as i32;

        let mut path: Vec<u32> = Vec::new();
        let mut endps: Vec<u32> = Vec::new();
        let mut vv = v as usize;
        while bv != bb {
            self.blossomparent[bv] = b as i32;
            path.push(bv as u32);
            endps.push(self.labelend[bv] as u32);
            debug_assert!(
                self.label[bv] == LABEL_T
                    || (self.label[bv] == LABEL_S
                        && self.labelend[bv] == self.mate[self.blossombase[bv] as usize])
            );
            debug_assert!(self.labelend[bv] >= 0);
            vv = self.endpoint[self.labelend[bv] as usize] as usize;
            bv = self.inblossom[vv] as usize;
        }
        let _ = vv;
        path.push(bb as u32);
        path.reverse();
        endps.reverse();
        endps.push(2 * k as u32);
        let mut ww = w as usize;
        while bw != bb {
            self.blossomparent[bw] = b as i32;
            path.push(bw as u32);
            endps.push(self.labelend[bw] as u32 ^ 1);
            debug_assert!(
                self.label[bw] == LABEL_T
                    || (self.label[bw] == LABEL_S
                        && self.labelend[bw] == self.mate[self.blossombase[bw] as usize])
            );
            debug_assert!(self.labelend[bw] >= 0);
            ww = self.endpoint[self.labelend[bw] as usize] as usize;
            bw = self.inblossom[ww] as usize;
        }
        let _ = ww;

        debug_assert_eq!(self.label[bb], LABEL_S);
        self.label[b] = LABEL_S;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        self.blossomchilds[b] = path;
        self.blossomendps[b] = endps;

        let mut leaves = Vec::new();
        self.blossom_leaves(b, &mut leaves);
        for &leaf in &leaves {
            if self.label[self.inblossom[leaf as usize] as usize] == LABEL_T {
                self.queue.push(leaf);
            }
            self.inblossom[leaf as usize] = b as u32;
        }

        // Recompute best edges into neighboring S-blossoms.
        let mut bestedgeto: Vec<i32> = vec![-1; 2 * self.n];
        let path = self.blossomchilds[b].clone();
        for &bv in &path {
            let bv = bv as usize;
            let nblists: Vec<Vec<u32>> = match self.blossombestedges[bv].take() {
                Some(lst) => vec![lst],
                None => {
                    let mut leaves = Vec::new();
                    self.blossom_leaves(bv, &mut leaves);
                    leaves
                        .iter()
                        .map(|&leaf| {
                            self.neighbend[leaf as usize]
                                .iter()
                                .map(|&p| p / 2)
                                .collect()
                        })
                        .collect()
                }
            };
            for nblist in nblists {
                for k in nblist {
                    let k = k as usize;
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j as usize] as usize == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j as usize] as usize;
                    if bj != b
                        && self.label[bj] == LABEL_S
                        && (bestedgeto[bj] == -1
                            || self.slack(k) < self.slack(bestedgeto[bj] as usize))
                    {
                        bestedgeto[bj] = k as i32;
                    }
                }
            }
            self.blossombestedges[bv] = None;
            self.bestedge[bv] = -1;
        }
        let best: Vec<u32> = bestedgeto
            .into_iter()
            .filter(|&k| k != -1)
            .map(|k| k as u32)
            .collect();
        self.bestedge[b] = -1;
        for &k in &best {
            if self.bestedge[b] == -1
                || self.slack(k as usize) < self.slack(self.bestedge[b] as usize)
            {
                self.bestedge[b] = k as i32;
            }
        }
        self.blossombestedges[b] = Some(best);
    }

    /// Expand the given top-level blossom.
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            let s = s as usize;
            self.blossomparent[s] = -1;
            if s < self.n {
                self.inblossom[s] = s as u32;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                let mut leaves = Vec::new();
                self.blossom_leaves(s, &mut leaves);
                for &v in &leaves {
                    self.inblossom[v as usize] = s as u32;
                }
            }
        }
        if !endstage && self.label[b] == LABEL_T {
            // The blossom sits on a T-branch of the alternating tree; the
            // even-length side of the path from the entry child to the base
            // keeps alternating labels, the rest becomes free.
            debug_assert!(self.labelend[b] >= 0);
            let entrychild =
                self.inblossom[self.endpoint[(self.labelend[b] ^ 1) as usize] as usize] as usize;
            let childs = self.blossomchilds[b].clone();
            let endps = self.blossomendps[b].clone();
            let len = childs.len() as i64;
            let entry_idx = childs
                .iter()
                .position(|&c| c as usize == entrychild)
                .expect("entry child present") as i64;
            let (mut j, jstep, endptrick): (i64, i64, i64) = if entry_idx & 1 != 0 {
                (entry_idx - len, 1, 0)
            } else {
                (entry_idx, -1, 1)
            };
            let at = |idx: i64| -> usize { childs[idx.rem_euclid(len) as usize] as usize };
            let ep_at = |idx: i64| -> u32 { endps[idx.rem_euclid(len) as usize] };
            let mut p = self.labelend[b] as u32;
            while j != 0 {
                // Relabel the two path nodes stepped over.
                let v1 = self.endpoint[(p ^ 1) as usize] as usize;
                self.label[v1] = LABEL_FREE;
                let q = ep_at(j - endptrick) ^ (endptrick as u32) ^ 1;
                self.label[self.endpoint[q as usize] as usize] = LABEL_FREE;
                self.assign_label(v1, LABEL_T, p as i32);
                self.allowedge[(ep_at(j - endptrick) / 2) as usize] = true;
                j += jstep;
                p = ep_at(j - endptrick) ^ (endptrick as u32);
                self.allowedge[(p / 2) as usize] = true;
                j += jstep;
            }
            // Entry child: relabel as T without touching the rest.
            let bv = at(j);
            let pv = self.endpoint[(p ^ 1) as usize] as usize;
            self.label[pv] = LABEL_T;
            self.label[bv] = LABEL_T;
            self.labelend[pv] = p as i32;
            self.labelend[bv] = p as i32;
            self.bestedge[bv] = -1;
            j += jstep;
            while at(j) != entrychild {
                let bv = at(j);
                if self.label[bv] == LABEL_S {
                    j += jstep;
                    continue;
                }
                let mut leaves = Vec::new();
                self.blossom_leaves(bv, &mut leaves);
                let mut labeled = None;
                for &v in &leaves {
                    if self.label[v as usize] != LABEL_FREE {
                        labeled = Some(v as usize);
                        break;
                    }
                }
                if let Some(v) = labeled {
                    debug_assert_eq!(self.label[v], LABEL_T);
                    debug_assert_eq!(self.inblossom[v] as usize, bv);
                    self.label[v] = LABEL_FREE;
                    let base = self.blossombase[bv] as usize;
                    let mate_ep = self.mate[base];
                    debug_assert!(mate_ep >= 0);
                    self.label[self.endpoint[mate_ep as usize] as usize] = LABEL_FREE;
                    let le = self.labelend[v];
                    self.assign_label(v, LABEL_T, le);
                }
                j += jstep;
            }
        }
        self.label[b] = LABEL_FREE;
        self.labelend[b] = -1;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = -1;
        self.blossombestedges[b] = None;
        self.bestedge[b] = -1;
        self.unusedblossoms.push(b as u32);
    }

    /// Swap matched and unmatched edges over the path from vertex v through
    /// blossom b to its base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] as usize != b {
            t = self.blossomparent[t] as usize;
        }
        if t >= self.n {
            self.augment_blossom(t, v);
        }
        let childs_len = self.blossomchilds[b].len() as i64;
        let i = self.blossomchilds[b]
            .iter()
            .position(|&c| c as usize == t)
            .expect("sub-blossom present") as i64;
        let (mut j, jstep, endptrick): (i64, i64, i64) = if i & 1 != 0 {
            (i - childs_len, 1, 0)
        } else {
            (i, -1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = {
                let len = self.blossomchilds[b].len() as i64;
                self.blossomchilds[b][j.rem_euclid(len) as usize] as usize
            };
            let p = {
                let len = self.blossomendps[b].len() as i64;
                self.blossomendps[b][(j - endptrick).rem_euclid(len) as usize]
                    ^ (endptrick as u32)
            };
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p as usize] as usize);
            }
            j += jstep;
            let t2 = {
                let len = self.blossomchilds[b].len() as i64;
                self.blossomchilds[b][j.rem_euclid(len) as usize] as usize
            };
            if t2 >= self.n {
                self.augment_blossom(t2, self.endpoint[(p ^ 1) as usize] as usize);
            }
            self.mate[self.endpoint[p as usize] as usize] = (p ^ 1) as i32;
            self.mate[self.endpoint[(p ^ 1) as usize] as usize] = p as i32;
        }
        let i = i as usize;
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0] as usize];
        debug_assert_eq!(self.blossombase[b], v as i32);
    }

    /// Swap matched and unmatched edges over the augmenting path through
    /// allowed edge k.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (s0, p0) in [(v, 2 * k as u32 + 1), (w, 2 * k as u32)] {
            let mut s = s0 as usize;
            let mut p = p0;
            loop {
                let bs = self.inblossom[s] as usize;
                debug_assert_eq!(self.label[bs], LABEL_S);
                debug_assert_eq!(self.labelend[bs], self.mate[self.blossombase[bs] as usize]);
                if bs >= self.n {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p as i32;
                if self.labelend[bs] == -1 {
                    break;
                }
                let t = self.endpoint[self.labelend[bs] as usize] as usize;
                let bt = self.inblossom[t] as usize;
                debug_assert_eq!(self.label[bt], LABEL_T);
                debug_assert!(self.labelend[bt] >= 0);
                s = self.endpoint[self.labelend[bt] as usize] as usize;
                let j = self.endpoint[(self.labelend[bt] ^ 1) as usize] as usize;
                debug_assert_eq!(self.blossombase[bt] as usize, t);
                if bt >= self.n {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = (self.labelend[bt] ^ 1) as u32;
            }
        }
    }

    fn run(&mut self) {
        let m = self.edges.len();
        for _stage in 0..self.n {
            self.label.fill(LABEL_FREE);
            self.bestedge.fill(-1);
            for be in self.blossombestedges[self.n..].iter_mut() {
                *be = None;
            }
            self.allowedge.fill(false);
            self.queue.clear();

            for v in 0..self.n {
                if self.mate[v] == -1
                    && self.label[self.inblossom[v] as usize] == LABEL_FREE
                {
                    self.assign_label(v, LABEL_S, -1);
                }
            }

            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    let v = v as usize;
                    debug_assert_eq!(self.label[self.inblossom[v] as usize], LABEL_S);
                    for pi in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][pi];
                        let k = (p / 2) as usize;
                        let w = self.endpoint[p as usize] as usize;
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
                            let bw = self.inblossom[w] as usize;
                            if self.label[bw] == LABEL_FREE {
                                self.assign_label(w, LABEL_T, (p ^ 1) as i32);
                            } else if self.label[bw] == LABEL_S {
                                let base = self.scan_blossom(v, w);
                                if base >= 0 {
                                    self.add_blossom(base as usize, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == LABEL_FREE {
                                debug_assert_eq!(self.label[bw], LABEL_T);
                                self.label[w] = LABEL_T;
                                self.labelend[w] = (p ^ 1) as i32;
                            }
                        } else if self.label[self.inblossom[w] as usize] == LABEL_S {
                            let b = self.inblossom[v] as usize;
                            if self.bestedge[b] == -1
                                || kslack < self.slack(self.bestedge[b] as usize)
                            {
                                self.bestedge[b] = k as i32;
                            }
                        } else if self.label[w] == LABEL_FREE
                            && (self.bestedge[w] == -1
                                || kslack < self.slack(self.bestedge[w] as usize))
                        {
                            self.bestedge[w] = k as i32;
                        }
                    }
                    if augmented {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // No augmenting path under the current duals: compute the
                // delta and adjust.
                let mut deltatype: i32 = -1;
                let mut delta: i128 = 0;
                let mut deltaedge: usize = 0;
                let mut deltablossom: usize = 0;

                if !self.max_cardinality {
                    deltatype = 1;
                    delta = self.dualvar[..self.n].iter().copied().min().unwrap_or(0);
                }
                for v in 0..self.n {
                    if self.label[self.inblossom[v] as usize] == LABEL_FREE
                        && self.bestedge[v] != -1
                    {
                        let d = self.slack(self.bestedge[v] as usize);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v] as usize;
                        }
                    }
                }
                for b in 0..2 * self.n {
                    if self.blossomparent[b] == -1
                        && self.label[b] == LABEL_S
                        && self.bestedge[b] != -1
                    {
                        let kslack = self.slack(self.bestedge[b] as usize);
                        debug_assert_eq!(kslack % 2, 0);
                        let d = kslack / 2;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b] as usize;
                        }
                    }
                }
                for b in self.n..2 * self.n {
                    if self.blossombase[b] >= 0
                        && self.blossomparent[b] == -1
                        && self.label[b] == LABEL_T
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    // No further improvement; max-cardinality optimum.
                    debug_assert!(self.max_cardinality);
                    deltatype = 1;
                    delta = self.dualvar[..self.n]
                        .iter()
                        .copied()
                        .min()
                        .unwrap_or(0)
                        .max(0);
                }

                for v in 0..self.n {
                    match self.label[self.inblossom[v] as usize] {
                        LABEL_S => self.dualvar[v] -= delta,
                        LABEL_T => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in self.n..2 * self.n {
                    if self.blossombase[b] >= 0 && self.blossomparent[b] == -1 {
                        match self.label[b] {
                            LABEL_S => self.dualvar[b] += delta,
                            LABEL_T => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i as usize] as usize] == LABEL_FREE {
                            i = j;
                        }
                        debug_assert_eq!(
                            self.label[self.inblossom[i as usize] as usize],
                            LABEL_S
                        );
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert_eq!(
                            self.label[self.inblossom[i as usize] as usize],
                            LABEL_S
                        );
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }

            if !augmented {
                break;
            }
            // End of a successful stage: expand unlabeled S-blossoms with
            // zero dual.
            for b in self.n..2 * self.n {
                if self.blossomparent[b] == -1
                    && self.blossombase[b] >= 0
                    && self.label[b] == LABEL_S
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        let _ = m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn weight_of(edges: &[(u32, u32, i128)], mate: &[i32]) -> (usize, i128) {
        let mut card = 0;
        let mut weight = 0;
        for &(u, v, w) in edges {
            if mate[u as usize] == v as i32 {
                debug_assert_eq!(mate[v as usize], u as i32);
                card += 1;
                weight += w;
            }
        }
        (card, weight)
    }

    fn check_valid(n: usize, edges: &[(u32, u32, i128)], mate: &[i32]) {
        assert_eq!(mate.len(), n);
        for v in 0..n {
            let m = mate[v];
            if m >= 0 {
                assert_eq!(mate[m as usize], v as i32, "symmetric mates");
                assert!(
                    edges
                        .iter()
                        .any(|&(a, b, _)| (a as i32 == v as i32 && b == m as u32)
                            || (b as i32 == v as i32 && a == m as u32)),
                    "matched pair is an edge"
                );
            }
        }
    }

    /// Exhaustive best matching: maximize weight, or (cardinality, weight)
    /// lexicographically when max_cardinality is set.
    fn brute_best(
        n: usize,
        edges: &[(u32, u32, i128)],
        max_cardinality: bool,
    ) -> (usize, i128) {
        fn go(
            edges: &[(u32, u32, i128)],
            used: &mut Vec<bool>,
            idx: usize,
            card: usize,
            weight: i128,
            best: &mut (usize, i128),
            max_cardinality: bool,
        ) {
            let better = if max_cardinality {
                (card, weight) > *best
            } else {
                weight > best.1 || (weight == best.1 && card > best.0)
            };
            if better {
                *best = (card, weight);
            }
            for k in idx..edges.len() {
                let (u, v, w) = edges[k];
                if !used[u as usize] && !used[v as usize] {
                    used[u as usize] = true;
                    used[v as usize] = true;
                    go(edges, used, k + 1, card + 1, weight + w, best, max_cardinality);
                    used[u as usize] = false;
                    used[v as usize] = false;
                }
            }
        }
        let mut best = (0, 0);
        let mut used = vec![false; n];
        go(edges, &mut used, 0, 0, 0, &mut best, max_cardinality);
        best
    }

    #[test]
    fn trivial_graphs() {
        assert_eq!(max_weight_matching(0, &[], false), Vec::<i32>::new());
        assert_eq!(max_weight_matching(2, &[(0, 1, 1)], false), vec![1, 0]);
        // A negative edge is not taken unless cardinality demands it.
        assert_eq!(max_weight_matching(2, &[(0, 1, -5)], false), vec![-1, -1]);
        assert_eq!(max_weight_matching(2, &[(0, 1, -5)], true), vec![1, 0]);
    }

    #[test]
    fn path_graph_weight_vs_cardinality() {
        let edges = [(0, 1, 5i128), (1, 2, 11), (2, 3, 5)];
        assert_eq!(max_weight_matching(4, &edges, false), vec![-1, 2, 1, -1]);
        assert_eq!(max_weight_matching(4, &edges, true), vec![1, 0, 3, 2]);
    }

    #[test]
    fn creates_s_blossom_and_uses_it_for_augmentation() {
        let edges = [(0, 1, 8i128), (0, 2, 9), (1, 2, 10), (2, 3, 7)];
        assert_eq!(max_weight_matching(4, &edges, false), vec![1, 0, 3, 2]);
        let edges = [
            (0, 1, 8i128),
            (0, 2, 9),
            (1, 2, 10),
            (2, 3, 7),
            (0, 5, 5),
            (3, 4, 6),
        ];
        assert_eq!(max_weight_matching(6, &edges, false), vec![5, 2, 1, 4, 3, 0]);
    }

    #[test]
    fn creates_t_blossom_and_relabels() {
        let edges = [
            (0, 1, 9i128),
            (0, 2, 8),
            (1, 2, 10),
            (0, 3, 5),
            (3, 4, 4),
            (0, 5, 3),
        ];
        assert_eq!(max_weight_matching(6, &edges, false), vec![5, 2, 1, 4, 3, 0]);
        let edges = [
            (0, 1, 9i128),
            (0, 2, 8),
            (1, 2, 10),
            (0, 3, 5),
            (3, 4, 3),
            (0, 5, 4),
        ];
        assert_eq!(max_weight_matching(6, &edges, false), vec![5, 2, 1, 4, 3, 0]);
        let edges = [
            (0, 1, 9i128),
            (0, 2, 8),
            (1, 2, 10),
            (0, 3, 5),
            (3, 4, 3),
            (2, 5, 4),
        ];
        assert_eq!(max_weight_matching(6, &edges, false), vec![1, 0, 5, 4, 3, 2]);
    }

    #[test]
    fn nested_s_blossom_augments() {
        let edges = [
            (0, 1, 9i128),
            (0, 2, 9),
            (1, 2, 10),
            (1, 3, 8),
            (2, 4, 8),
            (3, 4, 10),
            (4, 5, 6),
        ];
        assert_eq!(max_weight_matching(6, &edges, false), vec![2, 3, 0, 1, 5, 4]);
    }

    #[test]
    fn s_blossom_relabels_and_expands() {
        let edges = [
            (0, 1, 23i128),
            (0, 4, 22),
            (0, 5, 15),
            (1, 2, 25),
            (2, 3, 22),
            (3, 4, 25),
            (3, 7, 14),
            (4, 6, 13),
        ];
        assert_eq!(
            max_weight_matching(8, &edges, false),
            vec![5, 2, 1, 7, 6, 0, 4, 3]
        );
    }

    #[test]
    fn nasty_blossom_expansion_cases() {
        // Blossom with four sub-blossoms reached through an augmenting path.
        let edges = [
            (0, 1, 45i128),
            (0, 4, 45),
            (1, 2, 50),
            (2, 3, 45),
            (3, 4, 50),
            (0, 5, 30),
            (2, 8, 35),
            (3, 7, 35),
            (4, 6, 26),
            (8, 9, 5),
        ];
        assert_eq!(
            max_weight_matching(10, &edges, false),
            vec![5, 2, 1, 7, 6, 0, 4, 3, 9, 8]
        );
    }

    #[test]
    fn agrees_with_exhaustive_search_on_random_graphs() {
        let mut rng = SplitMix64::new(0xB10550);
        for case in 0..400 {
            let n = 2 + (rng.next_u64() % 7) as usize;
            let mut edges: Vec<(u32, u32, i128)> = Vec::new();
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    if rng.next_u64() % 2 == 0 {
                        let w = (rng.next_u64() % 41) as i128 - 20;
                        edges.push((u, v, w));
                    }
                }
            }
            if edges.is_empty() {
                continue;
            }
            for &maxcard in &[false, true] {
                let mate = max_weight_matching(n, &edges, maxcard);
                check_valid(n, &edges, &mate);
                let got = weight_of(&edges, &mate);
                let best = brute_best(n, &edges, maxcard);
                if maxcard {
                    assert_eq!(got, best, "case {case} maxcard, edges {edges:?}");
                } else {
                    assert_eq!(got.1, best.1, "case {case}, edges {edges:?}");
                }
            }
        }
    }

    #[test]
    fn large_negated_distance_instances_stay_exact() {
        // The PM reduction uses big negated integer weights; exercise the
        // i128 arithmetic path with weights near 2^60.
        let mut rng = SplitMix64::new(77);
        for _ in 0..20 {
            let n = 8;
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    let w = -((rng.next_u64() >> 4) as i128);
                    edges.push((u, v, w));
                }
            }
            let mate = max_weight_matching(n, &edges, true);
            check_valid(n, &edges, &mate);
            let (card, got) = weight_of(&edges, &mate);
            assert_eq!(card, n / 2, "perfect on complete graph");
            let best = brute_best(n, &edges, true);
            assert_eq!((card, got), best);
        }
    }
}
