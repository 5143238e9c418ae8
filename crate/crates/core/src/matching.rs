//! Exact minimum-weight perfect matching on decoding (sub)graphs.
//!
//! Weights are made strictly distinct by a deterministic per-edge
//! perturbation keyed on the global edge id, then quantized to integers.
//! Every window of the same decoding graph therefore sees bit-identical
//! weights for shared edges, which is what makes independently decoded
//! windows agree wherever their solutions overlap. Defects are matched by
//! the standard reduction: Dijkstra distances between defects and to the
//! nearest boundary, then one exact blossom matching over defects plus one
//! boundary copy per defect.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::blossom::max_weight_matching;
use crate::error::{Error, Result};
use crate::graph::DecodingGraph;
use crate::rng::mix64;

/// Integer weight scale: weights are `round(w * 2^SCALE_BITS)`.
pub const SCALE_BITS: u32 = 48;
/// Perturbation amplitude relative to the lightest graph edge.
pub const ETA_REL: f64 = 1.0 / (1u64 << 20) as f64;

#[inline]
fn unit_from_id(id: u64) -> f64 {
    // Uniform in (0, 1), strictly positive so perturbed weights never
    // collide with the unperturbed value.
    ((mix64(id) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn quantize(w: f64) -> i64 {
    let scaled = w * (1u64 << SCALE_BITS) as f64;
    debug_assert!(scaled > 0.0 && scaled < i64::MAX as f64 / 2.0);
    scaled.round() as i64
}

/// Perturbed integer edge weights, indexed by global edge id. The salt picks
/// the tie-breaking instance; all windows of one experiment share it.
pub fn perturbed_weights(graph: &DecodingGraph, salt: u64) -> Vec<i64> {
    let eta = graph.w_min * ETA_REL;
    graph
        .edges
        .iter()
        .enumerate()
        .map(|(e, ge)| quantize(ge.weight + eta * unit_from_id(e as u64 ^ salt)))
        .collect()
}

/// How a matching subgraph assigns integer weights to its arcs.
#[derive(Clone, Copy)]
pub enum WeightMode<'a> {
    /// Shared weights indexed by global edge id; consistent across windows.
    Shared(&'a [i64]),
    /// Re-perturb per subgraph keyed on the local edge index. Deliberately
    /// inconsistent across windows; used as a negative control for the
    /// consistency diagnostics.
    LocalSalt(u64),
}

/// One directed arc of the matching subgraph. `to >= n_real` is a virtual
/// boundary slot; `gedge` is the global edge id in the decoding graph.
#[derive(Clone, Copy, Debug)]
pub struct MatchArc {
    pub to: u32,
    pub weight: i64,
    pub gedge: u32,
}

/// Virtual slot order; ties between equally distant virtuals resolve to the
/// smallest slot.
pub const VIRT_SPACE: usize = 0;
pub const VIRT_TIME_LOW: usize = 1;
pub const VIRT_TIME_HIGH: usize = 2;
const NUM_VIRT: usize = 3;

/// CSR adjacency over the real nodes of a contiguous layer range, plus three
/// absorbing virtual nodes: the space boundary and the two time cuts.
pub struct MatchGraph {
    pub n_real: usize,
    pub layer_lo: usize,
    pub layer_hi: usize,
    pub n_per_layer: usize,
    arc_start: Vec<u32>,
    arcs: Vec<MatchArc>,
    pub has_boundary: bool,
}

impl MatchGraph {
    /// Restrict the decoding graph to node layers `lo..=hi`. Edges leaving
    /// the range through the bottom or top become arcs to the time-cut
    /// virtuals; boundary edges go to the space virtual. Global edge ids are
    /// preserved on every arc.
    pub fn build(
        graph: &DecodingGraph,
        lo: usize,
        hi: usize,
        mode: WeightMode,
    ) -> Result<MatchGraph> {
        if lo > hi || hi > graph.rounds {
            return Err(Error::model(format!(
                "invalid layer range [{lo}, {hi}] for {} layers",
                graph.rounds + 1
            )));
        }
        let npl = graph.n_per_layer;
        let n_real = (hi - lo + 1) * npl;
        let base = (lo * npl) as u32;
        let eta = graph.w_min * ETA_REL;

        // (src, dst, weight, gedge); real-real edges produce both directions.
        let mut entries: Vec<(u32, u32, i64, u32)> = Vec::new();
        let mut local_index = 0u64;
        for (e, ge) in graph.edges.iter().enumerate() {
            let ul = graph.node_layer(ge.u);
            let u_in = ul >= lo && ul <= hi;
            let pair = match ge.v {
                None => {
                    if u_in {
                        Some((ge.u - base, (n_real + VIRT_SPACE) as u32, false))
                    } else {
                        None
                    }
                }
                Some(v) => {
                    let v_in = {
                        let vl = graph.node_layer(v);
                        vl >= lo && vl <= hi
                    };
                    match (u_in, v_in) {
                        (true, true) => Some((ge.u - base, v - base, true)),
                        (true, false) => {
                            Some((ge.u - base, (n_real + VIRT_TIME_HIGH) as u32, false))
                        }
                        (false, true) => {
                            Some((v - base, (n_real + VIRT_TIME_LOW) as u32, false))
                        }
                        (false, false) => None,
                    }
                }
            };
            let Some((src, dst, both)) = pair else {
                continue;
            };
            let w = match mode {
                WeightMode::Shared(ws) => ws[e],
                WeightMode::LocalSalt(salt) => {
                    quantize(ge.weight + eta * unit_from_id(local_index ^ salt))
                }
            };
            local_index += 1;
            entries.push((src, dst, w, e as u32));
            if both {
                entries.push((dst, src, w, e as u32));
            }
        }

        let mut deg = vec![0u32; n_real + 1];
        for &(src, _, _, _) in &entries {
            deg[src as usize + 1] += 1;
        }
        let mut arc_start = deg;
        for i in 1..arc_start.len() {
            arc_start[i] += arc_start[i - 1];
        }
        let mut arcs = vec![
            MatchArc {
                to: 0,
                weight: 0,
                gedge: 0
            };
            entries.len()
        ];
        let mut cursor = arc_start.clone();
        for (src, dst, w, gedge) in entries {
            let slot = cursor[src as usize] as usize;
            cursor[src as usize] += 1;
            arcs[slot] = MatchArc {
                to: dst,
                weight: w,
                gedge,
            };
        }
        let has_boundary = arcs.iter().any(|a| a.to as usize >= n_real);
        Ok(MatchGraph {
            n_real,
            layer_lo: lo,
            layer_hi: hi,
            n_per_layer: npl,
            arc_start,
            arcs,
            has_boundary,
        })
    }

    #[inline]
    pub fn arcs_of(&self, local: u32) -> &[MatchArc] {
        &self.arcs[self.arc_start[local as usize] as usize
            ..self.arc_start[local as usize + 1] as usize]
    }

    #[inline]
    pub fn node_global(&self, local: u32) -> u32 {
        local + (self.layer_lo * self.n_per_layer) as u32
    }

    /// Local ids of the given global defects that fall inside this range.
    pub fn local_defects(&self, global_defects: &[u32]) -> Vec<u32> {
        let base = (self.layer_lo * self.n_per_layer) as u32;
        let end = ((self.layer_hi + 1) * self.n_per_layer) as u32;
        global_defects
            .iter()
            .filter(|&&g| g >= base && g < end)
            .map(|&g| g - base)
            .collect()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }
}

const NO_PRED: u32 = u32::MAX;
const INF: i64 = i64::MAX;

/// Reusable buffers for repeated decodes on graphs of the same shape.
pub struct DecodeScratch {
    dist: Vec<i64>,
    pred_from: Vec<u32>,
    pred_gedge: Vec<u32>,
    touched: Vec<u32>,
    heap: BinaryHeap<Reverse<(i64, u32)>>,
    defect_slot: Vec<i32>,
}

impl DecodeScratch {
    pub fn new() -> Self {
        DecodeScratch {
            dist: Vec::new(),
            pred_from: Vec::new(),
            pred_gedge: Vec::new(),
            touched: Vec::new(),
            heap: BinaryHeap::new(),
            defect_slot: Vec::new(),
        }
    }

    fn ensure(&mut self, n: usize) {
        if self.dist.len() < n {
            self.dist.resize(n, INF);
            self.pred_from.resize(n, NO_PRED);
            self.pred_gedge.resize(n, NO_PRED);
            self.defect_slot.resize(n, -1);
        }
    }

    fn reset_touched(&mut self) {
        for &v in &self.touched {
            self.dist[v as usize] = INF;
            self.pred_from[v as usize] = NO_PRED;
            self.pred_gedge[v as usize] = NO_PRED;
        }
        self.touched.clear();
        self.heap.clear();
    }
}

impl Default for DecodeScratch {
    fn default() -> Self {
        Self::new()
    }
}

/// A matched defect pair (local node ids); `None` partner means the pair
/// `(node, boundary)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(u32, Option<u32>)>,
    /// Global edge ids of the correction, sorted, with even multiplicities
    /// cancelled.
    pub correction: Vec<u32>,
    /// Sum of matched shortest-path integer weights.
    pub total_weight: i128,
}

impl Matching {
    pub fn empty() -> Self {
        Matching {
            pairs: Vec::new(),
            correction: Vec::new(),
            total_weight: 0,
        }
    }
}

struct DistanceData {
    /// Flattened defect-to-defect distance matrix, `INF` where unreachable
    /// or on the diagonal.
    pairwise: Vec<i64>,
    bdist: Vec<i64>,
    /// Virtual slot (n_real + k) through which the boundary was reached.
    bslot: Vec<u32>,
    /// Per-source predecessor arrays for path reconstruction.
    preds: Vec<(Vec<u32>, Vec<u32>)>,
}

/// Dijkstra from each defect, early-stopped once every later-indexed defect
/// and the nearest boundary are settled. Exact because all arc weights are
/// positive.
fn defect_distances(mg: &MatchGraph, defects: &[u32], scratch: &mut DecodeScratch) -> DistanceData {
    let d_count = defects.len();
    let n_all = mg.n_real + NUM_VIRT;
    scratch.ensure(n_all);
    for (i, &df) in defects.iter().enumerate() {
        scratch.defect_slot[df as usize] = i as i32;
    }

    let mut data = DistanceData {
        pairwise: vec![INF; d_count * d_count],
        bdist: vec![INF; d_count],
        bslot: vec![NO_PRED; d_count],
        preds: Vec::with_capacity(d_count),
    };

    for i in 0..d_count {
        scratch.reset_touched();
        let src = defects[i];
        scratch.dist[src as usize] = 0;
        scratch.touched.push(src);
        scratch.heap.push(Reverse((0, src)));
        let mut remaining = d_count - 1 - i;
        let mut boundary_found = !mg.has_boundary;

        while let Some(Reverse((du, u))) = scratch.heap.pop() {
            if remaining == 0 && boundary_found {
                break;
            }
            if du > scratch.dist[u as usize] {
                continue;
            }
            if (u as usize) >= mg.n_real {
                if !boundary_found {
                    boundary_found = true;
                    data.bdist[i] = du;
                    data.bslot[i] = u;
                }
                if remaining == 0 {
                    break;
                }
                continue;
            }
            let slot = scratch.defect_slot[u as usize];
            if slot >= 0 && slot as usize > i {
                data.pairwise[i * d_count + slot as usize] = du;
                data.pairwise[slot as usize * d_count + i] = du;
                remaining -= 1;
                if remaining == 0 && boundary_found {
                    break;
                }
            }
            for arc in mg.arcs_of(u) {
                let v = arc.to as usize;
                if v >= mg.n_real && boundary_found {
                    continue;
                }
                let nd = du + arc.weight;
                if nd < scratch.dist[v] {
                    if scratch.dist[v] == INF {
                        scratch.touched.push(arc.to);
                    }
                    scratch.dist[v] = nd;
                    scratch.pred_from[v] = u;
                    scratch.pred_gedge[v] = arc.gedge;
                    scratch.heap.push(Reverse((nd, arc.to)));
                }
            }
        }
        data.preds
            .push((scratch.pred_from.clone(), scratch.pred_gedge.clone()));
    }

    for &df in defects {
        scratch.defect_slot[df as usize] = -1;
    }
    data
}

fn walk_path(
    preds: &(Vec<u32>, Vec<u32>),
    src: u32,
    mut node: u32,
    out: &mut Vec<u32>,
) {
    while node != src {
        let g = preds.1[node as usize];
        debug_assert!(g != NO_PRED, "broken predecessor chain");
        out.push(g);
        node = preds.0[node as usize];
    }
}

/// Global edge ids of the minimum-weight path from local node `from` to
/// local node `to` under the graph's weights, sorted ascending. `to` may be
/// one of the virtual boundary slots; `from` must be real.
pub fn shortest_path_edges(
    mg: &MatchGraph,
    from: u32,
    to: u32,
    scratch: &mut DecodeScratch,
) -> Result<Vec<u32>> {
    let n_all = mg.n_real + NUM_VIRT;
    if from as usize >= mg.n_real || to as usize >= n_all || from == to {
        return Err(Error::invalid("path endpoints outside the match graph"));
    }
    scratch.ensure(n_all);
    scratch.reset_touched();
    scratch.dist[from as usize] = 0;
    scratch.touched.push(from);
    scratch.heap.push(Reverse((0, from)));
    while let Some(Reverse((du, u))) = scratch.heap.pop() {
        if du > scratch.dist[u as usize] {
            continue;
        }
        if u == to {
            let mut out = Vec::new();
            let mut node = to;
            while node != from {
                out.push(scratch.pred_gedge[node as usize]);
                node = scratch.pred_from[node as usize];
            }
            out.sort_unstable();
            return Ok(out);
        }
        // Virtual nodes absorb: paths never pass through them.
        if (u as usize) >= mg.n_real {
            continue;
        }
        for arc in mg.arcs_of(u) {
            let v = arc.to as usize;
            let nd = du + arc.weight;
            if nd < scratch.dist[v] {
                if scratch.dist[v] == INF {
                    scratch.touched.push(arc.to);
                }
                scratch.dist[v] = nd;
                scratch.pred_from[v] = u;
                scratch.pred_gedge[v] = arc.gedge;
                scratch.heap.push(Reverse((nd, arc.to)));
            }
        }
    }
    Err(Error::model("no path between the requested nodes"))
}

fn finish_correction(mut edges: Vec<u32>) -> Vec<u32> {
    edges.sort_unstable();
    let mut out = Vec::with_capacity(edges.len());
    let mut i = 0;
    while i < edges.len() {
        let mut j = i + 1;
        while j < edges.len() && edges[j] == edges[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(edges[i]);
        }
        i = j;
    }
    out
}

/// Exact MWPM over the given local defects. Every defect is matched either
/// to another defect or to the boundary, minimizing the total path weight.
pub fn mwpm(mg: &MatchGraph, defects: &[u32], scratch: &mut DecodeScratch) -> Result<Matching> {
    let d_count = defects.len();
    if d_count == 0 {
        return Ok(Matching::empty());
    }
    let data = defect_distances(mg, defects, scratch);

    // Blossom instance: defects 0..D, boundary copies D..2D. Copy-copy edges
    // are free so unused copies pair off among themselves.
    let mut edges: Vec<(u32, u32, i128)> = Vec::new();
    for i in 0..d_count {
        for j in i + 1..d_count {
            let d = data.pairwise[i * d_count + j];
            if d < INF {
                edges.push((i as u32, j as u32, -(d as i128)));
            }
        }
    }
    for i in 0..d_count {
        if data.bdist[i] < INF {
            edges.push((i as u32, (d_count + i) as u32, -(data.bdist[i] as i128)));
        }
    }
    for i in 0..d_count {
        for j in i + 1..d_count {
            edges.push(((d_count + i) as u32, (d_count + j) as u32, 0));
        }
    }
    let mate = max_weight_matching(2 * d_count, &edges, true);

    let mut pairs: Vec<(u32, Option<u32>)> = Vec::new();
    let mut correction_edges: Vec<u32> = Vec::new();
    let mut total_weight: i128 = 0;
    for i in 0..d_count {
        let m = mate[i];
        if m < 0 {
            return Err(Error::model(format!(
                "defect {} (node {}) unmatched; disconnected matching graph",
                i, defects[i]
            )));
        }
        let m = m as usize;
        if m < d_count {
            if m > i {
                pairs.push((defects[i], Some(defects[m])));
                total_weight += data.pairwise[i * d_count + m] as i128;
                walk_path(&data.preds[i], defects[i], defects[m], &mut correction_edges);
            }
        } else {
            debug_assert_eq!(m, d_count + i, "copies only pair with their defect");
            pairs.push((defects[i], None));
            total_weight += data.bdist[i] as i128;
            walk_path(&data.preds[i], defects[i], data.bslot[i], &mut correction_edges);
        }
    }

    Ok(Matching {
        pairs,
        correction: finish_correction(correction_edges),
        total_weight,
    })
}

/// Reference matcher: exhaustive search over all pairings (each defect pairs
/// with another or with the boundary). Only viable for small defect counts.
pub fn brute_force_mwpm(
    mg: &MatchGraph,
    defects: &[u32],
    scratch: &mut DecodeScratch,
) -> Result<Matching> {
    let d_count = defects.len();
    if d_count == 0 {
        return Ok(Matching::empty());
    }
    assert!(d_count <= 12, "exhaustive pairing is factorial in defects");
    let data = defect_distances(mg, defects, scratch);

    // choice[i]: usize::MAX boundary, else partner index.
    fn search(
        data: &DistanceData,
        d_count: usize,
        used: &mut Vec<bool>,
        choice: &mut Vec<usize>,
        acc: i128,
        best: &mut (i128, Vec<usize>),
    ) {
        if acc >= best.0 {
            return;
        }
        let Some(i) = (0..d_count).find(|&i| !used[i]) else {
            *best = (acc, choice.clone());
            return;
        };
        used[i] = true;
        if data.bdist[i] < INF {
            choice[i] = usize::MAX;
            search(data, d_count, used, choice, acc + data.bdist[i] as i128, best);
        }
        for j in i + 1..d_count {
            if !used[j] && data.pairwise[i * d_count + j] < INF {
                used[j] = true;
                choice[i] = j;
                choice[j] = i;
                search(
                    data,
                    d_count,
                    used,
                    choice,
                    acc + data.pairwise[i * d_count + j] as i128,
                    best,
                );
                used[j] = false;
            }
        }
        used[i] = false;
    }

    let mut used = vec![false; d_count];
    let mut choice = vec![usize::MAX; d_count];
    let mut best = (i128::MAX, Vec::new());
    search(&data, d_count, &mut used, &mut choice, 0, &mut best);
    if best.1.is_empty() {
        return Err(Error::model("no feasible pairing".to_string()));
    }

    let mut pairs = Vec::new();
    let mut correction_edges = Vec::new();
    for i in 0..d_count {
        match best.1[i] {
            usize::MAX => {
                pairs.push((defects[i], None));
                walk_path(&data.preds[i], defects[i], data.bslot[i], &mut correction_edges);
            }
            j if j > i => {
                pairs.push((defects[i], Some(defects[j])));
                walk_path(&data.preds[i], defects[i], defects[j], &mut correction_edges);
            }
            _ => {}
        }
    }
    Ok(Matching {
        pairs,
        correction: finish_correction(correction_edges),
        total_weight: best.0,
    })
}

/// Whether the correction flips the logical observable.
pub fn correction_flips_observable(graph: &DecodingGraph, correction: &[u32]) -> bool {
    correction
        .iter()
        .fold(false, |acc, &e| acc ^ graph.edges[e as usize].logical_flag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_layout, build_memory_circuit};
    use crate::dem::extract_dem;
    use crate::frame::{enumerate_fault_sites, DetectorIndexing};
    use crate::graph::build_z_graph;
    use crate::sampler::Sampler;

    fn setup(
        d: usize,
        rounds: usize,
        p: f64,
    ) -> (
        crate::code::Circuit,
        DetectorIndexing,
        crate::frame::FaultSites,
        crate::dem::DetectorErrorModel,
        DecodingGraph,
    ) {
        let layout = build_layout(d).unwrap();
        let circuit = build_memory_circuit(&layout, rounds, p).unwrap();
        let indexing = DetectorIndexing::new(&layout, rounds);
        let sites = enumerate_fault_sites(&circuit);
        let dem = extract_dem(&circuit, &indexing, &sites).unwrap();
        let graph = build_z_graph(&dem, &indexing).unwrap();
        (circuit, indexing, sites, dem, graph)
    }

    fn full_mg(graph: &DecodingGraph, weights: &[i64]) -> MatchGraph {
        MatchGraph::build(graph, 0, graph.rounds, WeightMode::Shared(weights)).unwrap()
    }

    #[test]
    fn perturbed_weights_are_positive_distinct_and_salted() {
        let (.., graph) = setup(3, 4, 0.003);
        let w1 = perturbed_weights(&graph, 11);
        let w2 = perturbed_weights(&graph, 11);
        let w3 = perturbed_weights(&graph, 12);
        assert_eq!(w1, w2, "same salt, same weights");
        assert_ne!(w1, w3, "different salt perturbs differently");
        assert!(w1.iter().all(|&w| w > 0));
        let mut sorted = w1.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), w1.len(), "perturbation separates all ties");
        // Perturbation is small: relative shift under 2^-19 of the weight.
        for (ge, &wi) in graph.edges.iter().zip(&w1) {
            let back = wi as f64 / (1u64 << SCALE_BITS) as f64;
            assert!((back - ge.weight).abs() <= graph.w_min * ETA_REL);
        }
    }

    #[test]
    fn subrange_redirects_cut_edges_to_time_virtuals() {
        let (.., graph) = setup(3, 8, 0.002);
        let weights = perturbed_weights(&graph, 5);
        let mg = MatchGraph::build(&graph, 2, 5, WeightMode::Shared(&weights)).unwrap();
        assert_eq!(mg.n_real, 4 * graph.n_per_layer);
        let mut low = 0;
        let mut high = 0;
        let mut space = 0;
        for u in 0..mg.n_real as u32 {
            for arc in mg.arcs_of(u) {
                let g = arc.gedge as usize;
                assert_eq!(arc.weight, weights[g], "window arcs reuse global weights");
                match arc.to as usize {
                    t if t == mg.n_real + VIRT_SPACE => space += 1,
                    t if t == mg.n_real + VIRT_TIME_LOW => {
                        low += 1;
                        let (lmin, _) = graph.edge_layers(&graph.edges[g]);
                        assert_eq!(lmin, 1, "low cut edges come from layer 1-2");
                    }
                    t if t == mg.n_real + VIRT_TIME_HIGH => {
                        high += 1;
                        let (_, lmax) = graph.edge_layers(&graph.edges[g]);
                        assert_eq!(lmax, 6, "high cut edges reach layer 6");
                    }
                    t => assert!(t < mg.n_real),
                }
            }
        }
        // At least the vertical measurement chain of every node crosses each
        // cut; diagonal space-time edges add more.
        assert!(low >= graph.n_per_layer);
        assert!(high >= graph.n_per_layer);
        assert!(space > 0);
        // The full-range build has no time cuts.
        let full = full_mg(&graph, &weights);
        for u in 0..full.n_real as u32 {
            for arc in full.arcs_of(u) {
                let t = arc.to as usize;
                assert!(t < full.n_real || t == full.n_real + VIRT_SPACE);
            }
        }
    }

    #[test]
    fn decode_of_quiet_shot_is_empty_and_deterministic() {
        let (circuit, indexing, sites, dem, graph) = setup(3, 3, 0.004);
        let weights = perturbed_weights(&graph, 1);
        let mg = full_mg(&graph, &weights);
        let sampler = Sampler::new(&circuit, &indexing, &sites, &dem, 900);
        let mut scratch = DecodeScratch::new();
        let quiet = sampler.realize(&[]);
        let m = mwpm(&mg, &mg.local_defects(&quiet.z_defects(dem.num_z_detectors)), &mut scratch)
            .unwrap();
        assert_eq!(m, Matching::empty());

        let shot = sampler.sample(7);
        let defects = mg.local_defects(&shot.z_defects(dem.num_z_detectors));
        let a = mwpm(&mg, &defects, &mut scratch).unwrap();
        let b = mwpm(&mg, &defects, &mut scratch).unwrap();
        assert_eq!(a, b, "scratch reuse does not change results");
    }

    #[test]
    fn correction_boundary_matches_defects() {
        // The corrected syndrome must vanish: every defect node is touched by
        // an odd number of correction edges, every other node by an even one.
        let (circuit, indexing, sites, dem, graph) = setup(3, 5, 0.01);
        let weights = perturbed_weights(&graph, 2);
        let mg = full_mg(&graph, &weights);
        let sampler = Sampler::new(&circuit, &indexing, &sites, &dem, 31);
        let mut scratch = DecodeScratch::new();
        for shot in 0..300 {
            let s = sampler.sample(shot);
            let defects = s.z_defects(dem.num_z_detectors);
            let m = mwpm(&mg, &mg.local_defects(&defects), &mut scratch).unwrap();
            let mut parity = vec![false; graph.num_nodes];
            for &e in &m.correction {
                let ge = &graph.edges[e as usize];
                parity[ge.u as usize] ^= true;
                if let Some(v) = ge.v {
                    parity[v as usize] ^= true;
                }
            }
            for node in 0..graph.num_nodes as u32 {
                let is_defect = defects.binary_search(&node).is_ok();
                assert_eq!(
                    parity[node as usize], is_defect,
                    "shot {shot} node {node} parity"
                );
            }
        }
    }

    #[test]
    fn matches_exhaustive_pairing_on_sampled_shots() {
        let (circuit, indexing, sites, dem, graph) = setup(3, 4, 0.008);
        let weights = perturbed_weights(&graph, 3);
        let mg = full_mg(&graph, &weights);
        let sampler = Sampler::new(&circuit, &indexing, &sites, &dem, 5150);
        let mut scratch = DecodeScratch::new();
        let mut compared = 0;
        let mut shot = 0u64;
        while compared < 250 {
            let s = sampler.sample(shot);
            shot += 1;
            let defects = mg.local_defects(&s.z_defects(dem.num_z_detectors));
            if defects.is_empty() || defects.len() > 8 {
                continue;
            }
            let fast = mwpm(&mg, &defects, &mut scratch).unwrap();
            let slow = brute_force_mwpm(&mg, &defects, &mut scratch).unwrap();
            assert_eq!(fast.total_weight, slow.total_weight, "shot {shot}");
            assert_eq!(fast.correction, slow.correction, "shot {shot}");
            compared += 1;
        }
    }

    #[test]
    fn pair_paths_compose_to_the_full_correction() {
        let (circuit, indexing, sites, dem, graph) = setup(3, 5, 0.006);
        let weights = perturbed_weights(&graph, 7);
        let mg = full_mg(&graph, &weights);
        let sampler = Sampler::new(&circuit, &indexing, &sites, &dem, 99);
        let mut scratch = DecodeScratch::new();
        let mut weight_of = std::collections::HashMap::new();
        for u in 0..mg.n_real as u32 {
            for arc in mg.arcs_of(u) {
                weight_of.insert(arc.gedge, arc.weight);
            }
        }
        let mut checked = 0;
        let mut boundary_pairs = 0;
        let mut shot = 0u64;
        while checked < 60 {
            let s = sampler.sample(shot);
            shot += 1;
            let defects = mg.local_defects(&s.z_defects(dem.num_z_detectors));
            if defects.is_empty() {
                continue;
            }
            let m = mwpm(&mg, &defects, &mut scratch).unwrap();
            let mut edges = Vec::new();
            for &(a, b) in &m.pairs {
                let path = match b {
                    Some(b) => shortest_path_edges(&mg, a, b, &mut scratch).unwrap(),
                    None => {
                        // The matched slot is whichever virtual node is
                        // cheapest to reach; perturbation breaks ties.
                        boundary_pairs += 1;
                        (mg.n_real..mg.n_real + NUM_VIRT)
                            .filter_map(|v| {
                                shortest_path_edges(&mg, a, v as u32, &mut scratch).ok()
                            })
                            .min_by_key(|p| p.iter().map(|g| weight_of[g]).sum::<i64>())
                            .expect("boundary reachable")
                    }
                };
                edges.extend(path);
            }
            assert_eq!(finish_correction(edges), m.correction, "shot {shot}");
            checked += 1;
        }
        assert!(boundary_pairs > 0, "no boundary matches exercised");

        assert!(shortest_path_edges(&mg, 0, 0, &mut scratch).is_err());
        assert!(shortest_path_edges(&mg, mg.n_real as u32, 0, &mut scratch).is_err());
        let past_end = (mg.n_real + NUM_VIRT) as u32;
        assert!(shortest_path_edges(&mg, 0, past_end, &mut scratch).is_err());
    }

    #[test]
    fn single_fault_shots_decode_without_logical_error() {
        // Any single mechanism is within the code distance, so the decoder
        // must predict its observable action exactly.
        let (circuit, indexing, sites, dem, graph) = setup(5, 5, 0.003);
        let weights = perturbed_weights(&graph, 4);
        let mg = full_mg(&graph, &weights);
        let sampler = Sampler::new(&circuit, &indexing, &sites, &dem, 0);
        let mut scratch = DecodeScratch::new();
        for (s, site) in sites.sites.iter().enumerate().step_by(11) {
            let _ = site;
            let shot = sampler.realize(&[s as u32]);
            let defects = mg.local_defects(&shot.z_defects(dem.num_z_detectors));
            let m = mwpm(&mg, &defects, &mut scratch).unwrap();
            let predicted = correction_flips_observable(&graph, &m.correction);
            assert_eq!(
                predicted, shot.observable_flip,
                "site {s} decoded to a logical error"
            );
        }
    }

    #[test]
    fn low_noise_logical_error_rate_is_suppressed() {
        let (circuit, indexing, sites, dem, graph) = setup(3, 3, 0.002);
        let weights = perturbed_weights(&graph, 6);
        let mg = full_mg(&graph, &weights);
        let sampler = Sampler::new(&circuit, &indexing, &sites, &dem, 424242);
        let mut scratch = DecodeScratch::new();
        let shots = 4000;
        let mut failures = 0;
        let mut raw_flips = 0;
        for shot in 0..shots {
            let s = sampler.sample(shot);
            if s.observable_flip {
                raw_flips += 1;
            }
            let defects = mg.local_defects(&s.z_defects(dem.num_z_detectors));
            let m = mwpm(&mg, &defects, &mut scratch).unwrap();
            if correction_flips_observable(&graph, &m.correction) != s.observable_flip {
                failures += 1;
            }
        }
        // Decoding must beat the trivial identity correction by a wide
        // margin; the residual rate at d=3, p=0.002 is below one percent.
        assert!(raw_flips >= 40, "noise too weak to measure ({raw_flips})");
        assert!(
            failures * 3 <= raw_flips,
            "decoder barely beats identity: {failures} vs {raw_flips} raw"
        );
        assert!(failures <= 40, "failure count {failures} out of scale");
    }

    #[test]
    fn local_salt_mode_differs_from_shared_weights() {
        let (.., graph) = setup(3, 6, 0.004);
        let weights = perturbed_weights(&graph, 9);
        let shared = MatchGraph::build(&graph, 1, 4, WeightMode::Shared(&weights)).unwrap();
        let local = MatchGraph::build(&graph, 1, 4, WeightMode::LocalSalt(9)).unwrap();
        assert_eq!(shared.num_arcs(), local.num_arcs());
        let mut differing = 0;
        for u in 0..shared.n_real as u32 {
            for (a, b) in shared.arcs_of(u).iter().zip(local.arcs_of(u)) {
                assert_eq!(a.to, b.to);
                assert_eq!(a.gedge, b.gedge);
                if a.weight != b.weight {
                    differing += 1;
                }
            }
        }
        assert!(differing > 0, "local salt must break weight consistency");
    }
}
