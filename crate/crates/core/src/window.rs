//! Sliding-window partition of the decoding graph and merge-free decoding.
//!
//! The round axis is split into cores of `core` rounds each; every window
//! decodes its core plus `buffer` extra layers on each side, then only its
//! core-owned correction edges are kept. Because all windows share one
//! consistently perturbed weight assignment, overlapping windows agree on
//! their shared region unless the local error weight reaches half the
//! weighted buffer size, so the kept pieces concatenate into a valid global
//! correction without any merge step. The residual seam defects, when they
//! do occur, are measured and can be repaired by one extra matching.

use crate::dem::DetectorErrorModel;
use crate::error::{Error, Result};
use crate::graph::{weighted_buffer_size, CutSide, DecodingGraph};
use crate::matching::{mwpm, DecodeScratch, MatchGraph, Matching, WeightMode};

/// Position of a window in the stream; encodes which time cuts exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    Sole,
    Start,
    Bulk,
    Final,
}

impl WindowKind {
    /// Byte value used in exported dataset records.
    pub fn code(self) -> u8 {
        match self {
            WindowKind::Start => 0,
            WindowKind::Bulk => 1,
            WindowKind::Final => 2,
            WindowKind::Sole => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<WindowKind> {
        match code {
            0 => Some(WindowKind::Start),
            1 => Some(WindowKind::Bulk),
            2 => Some(WindowKind::Final),
            3 => Some(WindowKind::Sole),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WindowSpec {
    pub index: usize,
    pub kind: WindowKind,
    /// Rounds `core_lo..core_hi` whose correction edges this window owns.
    pub core_lo: usize,
    pub core_hi: usize,
    /// Node layers decoded together, inclusive on both ends.
    pub full_lo: usize,
    pub full_hi: usize,
}

/// Split `rounds` rounds into cores of `core` rounds with `buffer` extra
/// layers per side. `core` must divide `rounds` evenly.
pub fn plan_windows(rounds: usize, core: usize, buffer: usize) -> Result<Vec<WindowSpec>> {
    if core == 0 || rounds == 0 {
        return Err(Error::invalid("window core and rounds must be positive"));
    }
    if rounds % core != 0 {
        return Err(Error::invalid(format!(
            "core {core} does not divide {rounds} rounds"
        )));
    }
    let count = rounds / core;
    let specs = (0..count)
        .map(|i| {
            let core_lo = i * core;
            let core_hi = (i + 1) * core;
            let kind = match (i == 0, i == count - 1) {
                (true, true) => WindowKind::Sole,
                (true, false) => WindowKind::Start,
                (false, true) => WindowKind::Final,
                (false, false) => WindowKind::Bulk,
            };
            WindowSpec {
                index: i,
                kind,
                core_lo,
                core_hi,
                full_lo: core_lo.saturating_sub(buffer),
                full_hi: (core_hi + buffer).min(rounds),
            }
        })
        .collect();
    Ok(specs)
}

/// Prebuilt matching subgraphs for every window of one configuration, plus
/// the weighted buffer size of each seam (minimum over both approach sides).
pub struct WindowSet<'g> {
    pub graph: &'g DecodingGraph,
    pub core: usize,
    pub buffer: usize,
    pub specs: Vec<WindowSpec>,
    pub subgraphs: Vec<MatchGraph>,
    pub seams: Vec<(usize, f64)>,
}

impl<'g> WindowSet<'g> {
    pub fn build(
        graph: &'g DecodingGraph,
        core: usize,
        buffer: usize,
        mode: WeightMode,
    ) -> Result<WindowSet<'g>> {
        let specs = plan_windows(graph.rounds, core, buffer)?;
        let subgraphs = specs
            .iter()
            .map(|s| MatchGraph::build(graph, s.full_lo, s.full_hi, mode))
            .collect::<Result<Vec<_>>>()?;
        let mut seams = Vec::new();
        for i in 1..specs.len() {
            let s = i * core;
            let lo = s.saturating_sub(buffer);
            let hi = (s + buffer).min(graph.rounds);
            let wb_low = weighted_buffer_size(graph, lo, hi, CutSide::Low, s)?;
            let wb_high = weighted_buffer_size(graph, lo, hi, CutSide::High, s)?;
            seams.push((s, wb_low.min(wb_high)));
        }
        Ok(WindowSet {
            graph,
            core,
            buffer,
            specs,
            subgraphs,
            seams,
        })
    }

    pub fn num_windows(&self) -> usize {
        self.specs.len()
    }

    /// Which window's core owns the given edge round.
    #[inline]
    pub fn owner_of_round(&self, round: usize) -> usize {
        round / self.core
    }
}

/// Result of decoding one window: its local matching restricted to the
/// core-owned edges.
#[derive(Clone, Debug)]
pub struct WindowOutcome {
    pub window: usize,
    pub defect_count: usize,
    /// Core-owned correction edges (global ids, sorted).
    pub core_correction: Vec<u32>,
    /// Parity of logical crossings among the owned edges.
    pub flip: bool,
}

/// Merge-free decode of a full shot.
#[derive(Clone, Debug)]
pub struct WindowedDecode {
    pub outcomes: Vec<WindowOutcome>,
    /// XOR of the per-window flips: the stream's logical prediction.
    pub predicted_flip: bool,
    /// Concatenation of all core corrections (sorted global edge ids).
    pub total_correction: Vec<u32>,
    /// Nodes where the total correction fails to reproduce the syndrome.
    pub residual: Vec<u32>,
}

/// Decode every window independently and keep core-owned edges only.
/// `defects` are global defect node ids, sorted ascending.
/// Decode one window of a shot and keep only the edges its core owns.
pub fn decode_one_window(
    ws: &WindowSet,
    window: usize,
    defects: &[u32],
    scratch: &mut DecodeScratch,
) -> Result<WindowOutcome> {
    let spec = &ws.specs[window];
    let mg = &ws.subgraphs[window];
    let local = mg.local_defects(defects);
    let matching = mwpm(mg, &local, scratch)?;
    let mut core_correction: Vec<u32> = matching
        .correction
        .iter()
        .copied()
        .filter(|&e| {
            let r = ws.graph.edges[e as usize].round as usize;
            r >= spec.core_lo && r < spec.core_hi
        })
        .collect();
    core_correction.sort_unstable();
    let flip = core_correction
        .iter()
        .fold(false, |acc, &e| acc ^ ws.graph.edges[e as usize].logical_flag);
    Ok(WindowOutcome {
        window: spec.index,
        defect_count: local.len(),
        core_correction,
        flip,
    })
}

pub fn decode_windowed(
    ws: &WindowSet,
    defects: &[u32],
    scratch: &mut DecodeScratch,
) -> Result<WindowedDecode> {
    let mut outcomes = Vec::with_capacity(ws.num_windows());
    let mut total_correction: Vec<u32> = Vec::new();
    for w in 0..ws.num_windows() {
        let outcome = decode_one_window(ws, w, defects, scratch)?;
        total_correction.extend_from_slice(&outcome.core_correction);
        outcomes.push(outcome);
    }
    total_correction.sort_unstable();
    debug_assert!(
        total_correction.windows(2).all(|w| w[0] != w[1]),
        "core ownership partitions edges; duplicates are impossible"
    );
    let predicted_flip = outcomes.iter().fold(false, |acc, o| acc ^ o.flip);
    let residual = residual_defects(ws.graph, &total_correction, defects);
    Ok(WindowedDecode {
        outcomes,
        predicted_flip,
        total_correction,
        residual,
    })
}

/// Nodes at which applying `correction` does not reproduce `defects`:
/// the XOR of the correction's boundary with the syndrome.
pub fn residual_defects(graph: &DecodingGraph, correction: &[u32], defects: &[u32]) -> Vec<u32> {
    let mut parity = std::collections::BTreeMap::<u32, bool>::new();
    for &e in correction {
        let ge = &graph.edges[e as usize];
        *parity.entry(ge.u).or_default() ^= true;
        if let Some(v) = ge.v {
            *parity.entry(v).or_default() ^= true;
        }
    }
    for &d in defects {
        *parity.entry(d).or_default() ^= true;
    }
    parity
        .into_iter()
        .filter_map(|(node, odd)| odd.then_some(node))
        .collect()
}

/// Repair pass for comparison runs: match the residual defects on the full
/// graph and fold the extra correction in.
pub fn merge_decode(
    full: &MatchGraph,
    residual: &[u32],
    scratch: &mut DecodeScratch,
) -> Result<Matching> {
    let local = full.local_defects(residual);
    debug_assert_eq!(local.len(), residual.len(), "residual nodes are in range");
    mwpm(full, &local, scratch)
}

/// Ground-truth per-window labels: the observable action of the fault
/// mechanisms whose attributed round falls in each core. Their XOR equals
/// the shot's observable flip exactly.
pub fn derive_labels(
    graph: &DecodingGraph,
    dem: &DetectorErrorModel,
    triggered: &[u32],
    num_windows: usize,
    core: usize,
) -> Vec<bool> {
    let mut labels = vec![false; num_windows];
    for &m in triggered {
        if let Some(r) = graph.mechanism_round[m as usize] {
            labels[r as usize / core] ^= dem.mechanisms[m as usize].observable_flip;
        }
    }
    labels
}

/// Outcome of the seam-weight bound on one shot with residual defects.
#[derive(Clone, Copy, Debug)]
pub struct SeamCheck {
    /// Total unperturbed weight of the fired mechanisms (graph edges only).
    pub fired_weight: f64,
    /// Half the smallest weighted buffer size among the seams the residual
    /// touches.
    pub bound: f64,
    pub violated: bool,
}

/// Window disagreement requires fired error weight of at least half the
/// weighted buffer size of some affected seam. Returns `None` when the
/// residual is empty (nothing to check).
pub fn check_seam_bound(
    ws: &WindowSet,
    dem: &DetectorErrorModel,
    triggered: &[u32],
    residual: &[u32],
) -> Option<SeamCheck> {
    if residual.is_empty() {
        return None;
    }
    let graph = ws.graph;
    let fired_weight: f64 = triggered
        .iter()
        .flat_map(|&m| graph.mechanism_edges[m as usize].iter())
        .map(|&e| graph.edges[e as usize].weight)
        .sum();
    let _ = dem;
    let reach = ws.buffer.max(1) + 1;
    let mut bound = f64::INFINITY;
    let mut any_relevant = false;
    for &(s, wb) in &ws.seams {
        let relevant = residual.iter().any(|&n| {
            let l = graph.node_layer(n);
            l.abs_diff(s) <= reach
        });
        if relevant {
            any_relevant = true;
            bound = bound.min(wb / 2.0);
        }
    }
    if !any_relevant {
        // Residual away from every seam should be impossible; fall back to
        // the weakest seam so the check still reports.
        for &(_, wb) in &ws.seams {
            bound = bound.min(wb / 2.0);
        }
    }
    let violated = fired_weight + 1e-9 < bound;
    Some(SeamCheck {
        fired_weight,
        bound,
        violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_layout, build_memory_circuit};
    use crate::dem::extract_dem;
    use crate::frame::{enumerate_fault_sites, DetectorIndexing};
    use crate::graph::build_z_graph;
    use crate::matching::{correction_flips_observable, perturbed_weights};
    use crate::sampler::Sampler;

    struct Fixture {
        circuit: crate::code::Circuit,
        indexing: DetectorIndexing,
        sites: crate::frame::FaultSites,
        dem: DetectorErrorModel,
        graph: DecodingGraph,
        weights: Vec<i64>,
    }

    impl Fixture {
        fn new(d: usize, rounds: usize, p: f64) -> Self {
            let layout = build_layout(d).unwrap();
            let circuit = build_memory_circuit(&layout, rounds, p).unwrap();
            let indexing = DetectorIndexing::new(&layout, rounds);
            let sites = enumerate_fault_sites(&circuit);
            let dem = extract_dem(&circuit, &indexing, &sites).unwrap();
            let graph = build_z_graph(&dem, &indexing).unwrap();
            let weights = perturbed_weights(&graph, 0xA5);
            Fixture {
                circuit,
                indexing,
                sites,
                dem,
                graph,
                weights,
            }
        }

        fn sampler(&self, seed: u64) -> Sampler<'_> {
            Sampler::new(&self.circuit, &self.indexing, &self.sites, &self.dem, seed)
        }

        fn window_set(&self, core: usize, buffer: usize) -> WindowSet<'_> {
            WindowSet::build(&self.graph, core, buffer, WeightMode::Shared(&self.weights))
                .unwrap()
        }
    }

    #[test]
    fn plans_cover_the_round_axis() {
        let specs = plan_windows(12, 3, 2).unwrap();
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[0].kind, WindowKind::Start);
        assert_eq!((specs[0].core_lo, specs[0].core_hi), (0, 3));
        assert_eq!((specs[0].full_lo, specs[0].full_hi), (0, 5));
        assert_eq!(specs[1].kind, WindowKind::Bulk);
        assert_eq!((specs[1].full_lo, specs[1].full_hi), (1, 8));
        assert_eq!(specs[3].kind, WindowKind::Final);
        assert_eq!((specs[3].core_lo, specs[3].core_hi), (9, 12));
        assert_eq!((specs[3].full_lo, specs[3].full_hi), (7, 12));

        let sole = plan_windows(6, 6, 9).unwrap();
        assert_eq!(sole.len(), 1);
        assert_eq!(sole[0].kind, WindowKind::Sole);
        assert_eq!((sole[0].full_lo, sole[0].full_hi), (0, 6));

        assert!(plan_windows(10, 3, 1).is_err(), "core must divide rounds");
        assert!(plan_windows(10, 0, 1).is_err());
    }

    #[test]
    fn window_kind_codes_round_trip() {
        for kind in [
            WindowKind::Sole,
            WindowKind::Start,
            WindowKind::Bulk,
            WindowKind::Final,
        ] {
            assert_eq!(WindowKind::from_code(kind.code()), Some(kind));
        }
        assert_eq!(WindowKind::from_code(9), None);
    }

    #[test]
    fn every_edge_is_owned_by_exactly_one_core() {
        let fx = Fixture::new(3, 8, 0.004);
        for (core, buffer) in [(1, 0), (1, 2), (2, 1), (4, 3), (8, 2)] {
            let ws = fx.window_set(core, buffer);
            let mut owned = vec![0usize; ws.num_windows()];
            for ge in &fx.graph.edges {
                owned[ws.owner_of_round(ge.round as usize)] += 1;
            }
            assert_eq!(
                owned.iter().sum::<usize>(),
                fx.graph.edges.len(),
                "core {core} buffer {buffer}"
            );
            assert!(owned.iter().all(|&c| c > 0), "every core owns edges");
        }
    }

    #[test]
    fn giant_buffer_reproduces_the_global_decode() {
        let fx = Fixture::new(3, 6, 0.01);
        let ws = fx.window_set(2, 6);
        let full =
            MatchGraph::build(&fx.graph, 0, fx.graph.rounds, WeightMode::Shared(&fx.weights))
                .unwrap();
        let sampler = fx.sampler(555);
        let mut scratch = DecodeScratch::new();
        for shot in 0..150 {
            let s = sampler.sample(shot);
            let defects = s.z_defects(fx.dem.num_z_detectors);
            let wd = decode_windowed(&ws, &defects, &mut scratch).unwrap();
            let global = mwpm(&full, &full.local_defects(&defects), &mut scratch).unwrap();
            assert_eq!(
                wd.total_correction, global.correction,
                "shot {shot}: full-overlap windows must reassemble the global answer"
            );
            assert!(wd.residual.is_empty(), "shot {shot}");
            assert_eq!(
                wd.predicted_flip,
                correction_flips_observable(&fx.graph, &global.correction)
            );
        }
    }

    #[test]
    fn labels_close_over_the_observable() {
        let fx = Fixture::new(3, 6, 0.01);
        let sampler = fx.sampler(99);
        for shot in 0..2000 {
            let s = sampler.sample(shot);
            let labels = derive_labels(&fx.graph, &fx.dem, &s.triggered, 3, 2);
            let xor = labels.iter().fold(false, |a, &b| a ^ b);
            assert_eq!(xor, s.observable_flip, "shot {shot}");
        }
    }

    #[test]
    fn merge_repair_clears_every_residual() {
        let fx = Fixture::new(3, 8, 0.02);
        let ws = fx.window_set(2, 1);
        let full =
            MatchGraph::build(&fx.graph, 0, fx.graph.rounds, WeightMode::Shared(&fx.weights))
                .unwrap();
        let sampler = fx.sampler(1234);
        let mut scratch = DecodeScratch::new();
        let mut residual_shots = 0;
        for shot in 0..400 {
            let s = sampler.sample(shot);
            let defects = s.z_defects(fx.dem.num_z_detectors);
            let wd = decode_windowed(&ws, &defects, &mut scratch).unwrap();
            if wd.residual.is_empty() {
                continue;
            }
            residual_shots += 1;
            let repair = merge_decode(&full, &wd.residual, &mut scratch).unwrap();
            let mut total = wd.total_correction.clone();
            total.extend_from_slice(&repair.correction);
            total.sort_unstable();
            let mut merged = Vec::new();
            let mut i = 0;
            while i < total.len() {
                let mut j = i + 1;
                while j < total.len() && total[j] == total[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    merged.push(total[i]);
                }
                i = j;
            }
            assert!(
                residual_defects(&fx.graph, &merged, &defects).is_empty(),
                "shot {shot}: repair must clear the syndrome"
            );
        }
        assert!(
            residual_shots > 0,
            "tiny buffer at high noise should produce seam disagreements"
        );
    }

    #[test]
    fn seam_bound_holds_in_consistent_mode() {
        let fx = Fixture::new(3, 9, 0.02);
        let ws = fx.window_set(3, 1);
        let sampler = fx.sampler(777);
        let mut scratch = DecodeScratch::new();
        let mut checked = 0;
        for shot in 0..3000 {
            let s = sampler.sample(shot);
            let defects = s.z_defects(fx.dem.num_z_detectors);
            let wd = decode_windowed(&ws, &defects, &mut scratch).unwrap();
            if let Some(check) = check_seam_bound(&ws, &fx.dem, &s.triggered, &wd.residual) {
                checked += 1;
                assert!(
                    !check.violated,
                    "shot {shot}: fired weight {} below bound {}",
                    check.fired_weight, check.bound
                );
            }
        }
        assert!(checked > 0, "no residual shots; the check never ran");
    }

    #[test]
    fn sabotaged_weights_violate_the_seam_bound() {
        // Two fired mechanisms whose defects straddle a seam admit two
        // exactly tied two-edge explanations, one per side of the seam.
        // With per-window tie-breaking the owner windows eventually pick
        // opposite sides, leaving a featherweight residual that breaks the
        // weight bound. Consistent shared weights can never do this.
        let d = 5;
        let rounds = 15;
        let layout = build_layout(d).unwrap();
        let fx = Fixture::new(d, rounds, 0.004);
        let npl = fx.graph.n_per_layer;
        let r = 5;

        let widx: std::collections::HashMap<(u32, u32), usize> = fx
            .graph
            .edges
            .iter()
            .enumerate()
            .filter_map(|(i, ge)| ge.v.map(|v| ((ge.u, v), i)))
            .collect();
        // Both stabilizers must be interior weight-4 plaquettes away from the
        // column boundaries: their vertical edges then collect identical fault
        // sets (same CNOT count, no ancilla idles) and tie exactly, and the
        // space boundary stays several edges away.
        let is_central = |stab: usize| {
            let support = &layout.z_stabilizers[stab].support;
            support.len() == 4 && support.iter().all(|&q| (1..d - 1).contains(&(q % d)))
        };
        // Horizontal in-layer edge P-Q at layer r with no direct diagonal
        // shortcut from P@r to Q@r+1; then {h(P,Q)@r, v(Q)@r} ties with
        // {v(P)@r, h(P,Q)@r+1}.
        let mut pick = None;
        'outer: for m in 0..fx.dem.mechanisms.len() {
            let zfp = &fx.dem.mechanisms[m].z_footprint;
            if zfp.len() != 2 {
                continue;
            }
            let (a, b) = (zfp[0], zfp[1]);
            if fx.graph.node_layer(a) != r || fx.graph.node_layer(b) != r {
                continue;
            }
            let (sa, sb) = (a as usize - r * npl, b as usize - r * npl);
            if !is_central(sa) || !is_central(sb) {
                continue;
            }
            for (p, q) in [(a, b), (b, a)] {
                // Node ids grow with the layer, so the diagonal towards the
                // next layer is always stored as (p, q + npl).
                if widx.contains_key(&(p, q + npl as u32)) {
                    continue;
                }
                let vert_target = vec![q, q + npl as u32];
                let vm = fx
                    .dem
                    .mechanisms
                    .iter()
                    .position(|mm| mm.z_footprint == vert_target);
                if let Some(vm) = vm {
                    pick = Some((m, vm, p, q));
                    break 'outer;
                }
            }
        }
        let (hm, vm, p_node, q_node) =
            pick.expect("central straddling tie constellation exists");

        // The two explanations must tie to well below the perturbation scale,
        // otherwise every window agrees no matter how it breaks ties.
        let w = |u: u32, v: u32| {
            let key = (u.min(v), u.max(v));
            fx.graph.edges[*widx.get(&key).expect("tie edge exists")].weight
        };
        let np = npl as u32;
        let opt_low = w(p_node, q_node) + w(q_node, q_node + np);
        let opt_high = w(p_node, p_node + np) + w(p_node + np, q_node + np);
        assert!(
            (opt_low - opt_high).abs() < 1e-9,
            "explanations no longer tie: {opt_low} vs {opt_high}"
        );

        let sampler = fx.sampler(0);
        let site_h = sampler.site_of_mechanism(hm as u32).unwrap();
        let site_v = sampler.site_of_mechanism(vm as u32).unwrap();
        let shot = sampler.realize(&[site_h, site_v]);
        let defects = shot.z_defects(fx.dem.num_z_detectors);
        assert_eq!(
            defects,
            {
                let mut v = vec![p_node, q_node + npl as u32];
                v.sort_unstable();
                v
            },
            "constellation fires one defect on each side of the seam"
        );

        // Buffer choice: small enough that the two owner windows start on
        // different layers (so their local edge indices differ), big enough
        // that half the buffer weight exceeds two mechanisms.
        let buffer = 5;
        let mut scratch = DecodeScratch::new();
        // Shared weights must stay consistent for every salt.
        for salt in 0..8u64 {
            let weights = perturbed_weights(&fx.graph, salt);
            let ws =
                WindowSet::build(&fx.graph, 3, buffer, WeightMode::Shared(&weights)).unwrap();
            let wd = decode_windowed(&ws, &defects, &mut scratch).unwrap();
            assert!(wd.residual.is_empty(), "consistent decode, salt {salt}");
        }
        // Per-window salts disagree for some salt, and the resulting
        // residual sits far below the seam weight bound.
        let mut violated = false;
        for salt in 0..64u64 {
            let ws = WindowSet::build(&fx.graph, 3, buffer, WeightMode::LocalSalt(salt)).unwrap();
            let wd = decode_windowed(&ws, &defects, &mut scratch).unwrap();
            if let Some(check) = check_seam_bound(&ws, &fx.dem, &shot.triggered, &wd.residual) {
                assert!(
                    check.fired_weight < check.bound,
                    "two cheap mechanisms cannot reach the buffer bound: {} vs {}",
                    check.fired_weight,
                    check.bound
                );
                assert!(check.violated);
                violated = true;
                break;
            }
        }
        assert!(
            violated,
            "no salt produced a seam disagreement; tie-breaking is suspiciously consistent"
        );
    }
}
