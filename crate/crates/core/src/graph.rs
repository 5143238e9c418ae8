//! Z-basis decoding graph.
//!
//! Mechanisms with one or two Z detectors become edges directly (a single
//! detector pairs with the space boundary). Larger footprints are
//! hyperedges: each is decomposed into existing edges whose real endpoints
//! partition the footprint and whose flags reproduce the mechanism's
//! observable action, then its probability is folded into every component
//! edge by the same exclusive-or rule used during model extraction.
//! Edge weights are `ln((1-p)/p)` of the final merged probability.

use crate::dem::{merge_probability, DetectorErrorModel};
use crate::error::{Error, Result};
use crate::frame::DetectorIndexing;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

/// Sentinel partner id for edges that end on the space boundary.
const BOUNDARY: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct GraphEdge {
    pub u: u32,
    /// `None` when the edge connects `u` to the space boundary.
    pub v: Option<u32>,
    pub probability: f64,
    pub weight: f64,
    pub logical_flag: bool,
    /// Round the edge is attributed to for window bookkeeping:
    /// the smaller endpoint layer, clamped to the last round.
    pub round: u32,
}

#[derive(Clone, Debug)]
pub struct DecodingGraph {
    pub rounds: usize,
    /// Z stabilizers per detector layer.
    pub n_per_layer: usize,
    /// Detector layers are 0..=rounds, so this is (rounds+1) * n_per_layer.
    pub num_nodes: usize,
    pub edges: Vec<GraphEdge>,
    pub w_min: f64,
    pub max_degree: usize,
    /// Mechanism id -> ids of the graph edges realizing its Z footprint.
    /// Empty for mechanisms without Z detectors.
    pub mechanism_edges: Vec<Vec<u32>>,
    /// Mechanism id -> round of its earliest Z detector layer, clamped to
    /// the last round. `None` for mechanisms without Z detectors.
    pub mechanism_round: Vec<Option<u32>>,
}

impl DecodingGraph {
    pub fn node_layer(&self, node: u32) -> usize {
        node as usize / self.n_per_layer
    }

    /// (min, max) endpoint layer of an edge; boundary edges sit in the
    /// single layer of their real endpoint.
    pub fn edge_layers(&self, e: &GraphEdge) -> (usize, usize) {
        let lu = self.node_layer(e.u);
        match e.v {
            Some(v) => {
                let lv = self.node_layer(v);
                (lu.min(lv), lu.max(lv))
            }
            None => (lu, lu),
        }
    }
}

struct EdgeAcc {
    prob: f64,
    flag: bool,
    /// Probability of the strongest direct contributor; its flag wins.
    /// Distinct error classes can share an endpoint pair with opposite
    /// observable action when they differ by a logical operator (possible
    /// at d=3 where weight-1 and weight-2 X actions span a weight-3
    /// logical), and a matching edge can only carry one flag.
    dominant: f64,
}

fn upsert(map: &mut BTreeMap<(u32, u32), EdgeAcc>, key: (u32, u32), p: f64, flag: bool) {
    match map.entry(key) {
        Entry::Occupied(mut e) => {
            let acc = e.get_mut();
            acc.prob = merge_probability(acc.prob, p);
            if p > acc.dominant {
                acc.dominant = p;
                acc.flag = flag;
            }
        }
        Entry::Vacant(slot) => {
            slot.insert(EdgeAcc { prob: p, flag, dominant: p });
        }
    }
}

/// Depth-first search for the first partition (in ascending partner order,
/// boundary last) of `rem` into existing edges whose flags XOR to
/// `want_flag`. Footprints are tiny, so backtracking is cheap.
fn decompose(
    rem: &mut Vec<u32>,
    map: &BTreeMap<(u32, u32), EdgeAcc>,
    want_flag: bool,
    out: &mut Vec<(u32, u32)>,
) -> bool {
    if rem.is_empty() {
        let parity = out.iter().fold(false, |acc, k| acc ^ map[k].flag);
        return parity == want_flag;
    }
    let u = rem[0];
    for i in 1..rem.len() {
        let v = rem[i];
        if map.contains_key(&(u, v)) {
            let mut next = rem[1..].to_vec();
            next.remove(i - 1);
            out.push((u, v));
            if decompose(&mut next, map, want_flag, out) {
                return true;
            }
            out.pop();
        }
    }
    if map.contains_key(&(u, BOUNDARY)) {
        let mut next = rem[1..].to_vec();
        out.push((u, BOUNDARY));
        if decompose(&mut next, map, want_flag, out) {
            return true;
        }
        out.pop();
    }
    false
}

pub fn build_z_graph(
    dem: &DetectorErrorModel,
    indexing: &DetectorIndexing,
) -> Result<DecodingGraph> {
    let n_per_layer = indexing.n_z;
    let rounds = indexing.rounds;
    let num_nodes = indexing.num_z_detectors;

    let mut map: BTreeMap<(u32, u32), EdgeAcc> = BTreeMap::new();
    for m in &dem.mechanisms {
        match *m.z_footprint.as_slice() {
            [] => {
                if m.observable_flip {
                    return Err(Error::model(format!(
                        "observable flip without Z syndrome from {}",
                        m.provenance
                    )));
                }
            }
            [u] => upsert(&mut map, (u, BOUNDARY), m.probability, m.observable_flip),
            [u, v] => upsert(&mut map, (u, v), m.probability, m.observable_flip),
            _ => {}
        }
    }

    let mut mech_keys: Vec<Vec<(u32, u32)>> = Vec::with_capacity(dem.mechanisms.len());
    for m in &dem.mechanisms {
        match m.z_footprint.len() {
            0 => mech_keys.push(Vec::new()),
            1 => mech_keys.push(vec![(m.z_footprint[0], BOUNDARY)]),
            2 => mech_keys.push(vec![(m.z_footprint[0], m.z_footprint[1])]),
            _ => {
                let mut rem = m.z_footprint.clone();
                let mut parts = Vec::new();
                if !decompose(&mut rem, &map, m.observable_flip, &mut parts) {
                    return Err(Error::decomposition(format!(
                        "no edge decomposition for footprint {:?} from {}",
                        m.z_footprint, m.provenance
                    )));
                }
                for &key in &parts {
                    let acc = map.get_mut(&key).expect("component edge exists");
                    acc.prob = merge_probability(acc.prob, m.probability);
                }
                mech_keys.push(parts);
            }
        }
    }

    let mut edges = Vec::with_capacity(map.len());
    let mut key_id: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut degree = vec![0usize; num_nodes];
    let mut w_min = f64::INFINITY;
    for (&(u, v), acc) in &map {
        debug_assert!(acc.prob > 0.0 && acc.prob < 0.5);
        let weight = ((1.0 - acc.prob) / acc.prob).ln();
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::model(format!(
                "non-positive edge weight {weight} at probability {}",
                acc.prob
            )));
        }
        w_min = w_min.min(weight);
        let lu = u as usize / n_per_layer;
        let (v_opt, round) = if v == BOUNDARY {
            (None, lu.min(rounds - 1))
        } else {
            degree[v as usize] += 1;
            (Some(v), lu.min(v as usize / n_per_layer).min(rounds - 1))
        };
        degree[u as usize] += 1;
        key_id.insert((u, v), edges.len() as u32);
        edges.push(GraphEdge {
            u,
            v: v_opt,
            probability: acc.prob,
            weight,
            logical_flag: acc.flag,
            round: round as u32,
        });
    }

    let mechanism_edges = mech_keys
        .into_iter()
        .map(|keys| keys.into_iter().map(|k| key_id[&k]).collect())
        .collect();
    let mechanism_round = dem
        .mechanisms
        .iter()
        .map(|m| {
            m.z_footprint.first().map(|&first| {
                let layer = first as usize / n_per_layer;
                layer.min(rounds - 1) as u32
            })
        })
        .collect();

    Ok(DecodingGraph {
        rounds,
        n_per_layer,
        num_nodes,
        edges,
        w_min,
        max_degree: degree.iter().copied().max().unwrap_or(0),
        mechanism_edges,
        mechanism_round,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutSide {
    Low,
    High,
}

/// Minimum unperturbed path weight from the time cut of a window to any
/// node in `seam_layer`, walking only nodes in layers `lo..=hi`. The cut
/// consists of the real edges with exactly one endpoint inside the layer
/// range on the given side; entering through such an edge costs its full
/// weight. Returns infinity when the side has no cut (a closed end).
pub fn weighted_buffer_size(
    graph: &DecodingGraph,
    lo: usize,
    hi: usize,
    side: CutSide,
    seam_layer: usize,
) -> Result<f64> {
    if lo > hi || hi > graph.rounds || seam_layer < lo || seam_layer > hi {
        return Err(Error::invalid(format!(
            "bad buffer query: layers {lo}..={hi}, seam {seam_layer}"
        )));
    }
    let n = graph.n_per_layer;
    let local = |node: u32| node as usize - lo * n;
    let in_range = |node: u32| {
        let l = node as usize / n;
        l >= lo && l <= hi
    };

    let num_local = (hi - lo + 1) * n;
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); num_local];
    let mut dist = vec![f64::INFINITY; num_local];
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<HeapItem>> =
        std::collections::BinaryHeap::new();

    for e in &graph.edges {
        let Some(v) = e.v else { continue };
        match (in_range(e.u), in_range(v)) {
            (true, true) => {
                adj[local(e.u)].push((v, e.weight));
                adj[local(v)].push((e.u, e.weight));
            }
            (inside_u, inside_v) if inside_u != inside_v => {
                let (inner, outer) = if inside_u { (e.u, v) } else { (v, e.u) };
                let outer_layer = outer as usize / n;
                let cut_side = if outer_layer < lo { CutSide::Low } else { CutSide::High };
                if cut_side == side {
                    let li = local(inner);
                    if e.weight < dist[li] {
                        dist[li] = e.weight;
                        heap.push(std::cmp::Reverse(HeapItem { dist: e.weight, node: inner }));
                    }
                }
            }
            _ => {}
        }
    }

    while let Some(std::cmp::Reverse(HeapItem { dist: d, node })) = heap.pop() {
        let li = local(node);
        if d > dist[li] {
            continue;
        }
        if node as usize / n == seam_layer {
            return Ok(d);
        }
        for &(next, w) in &adj[li] {
            let nd = d + w;
            let ln = local(next);
            if nd < dist[ln] {
                dist[ln] = nd;
                heap.push(std::cmp::Reverse(HeapItem { dist: nd, node: next }));
            }
        }
    }
    Ok(f64::INFINITY)
}

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    node: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
