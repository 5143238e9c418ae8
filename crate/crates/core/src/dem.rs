//! Detector error model extraction.
//!
//! Every elementary fault site is propagated on its own through the
//! noiseless circuit (64 sites per pass, one bit lane each) to obtain its
//! detector footprint and observable action. Sites with identical symptoms
//! are merged into one mechanism whose probability composes by the
//! exclusive-or rule `p <- p1(1-p2) + p2(1-p1)`, since only the firing
//! parity of a symptom class is observable.

use crate::code::{Circuit, Op};
use crate::error::{Error, Result};
use crate::frame::{DetectorIndexing, FaultSites, SiteKind};
use std::collections::HashMap;

/// Where a mechanism came from: its first contributing elementary site.
#[derive(Clone, Copy, Debug)]
pub struct Provenance {
    pub timestep: u32,
    pub site: SiteKind,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.site {
            SiteKind::RecordFlip { record } => {
                write!(f, "t{} record {} flip", self.timestep, record)
            }
            SiteKind::Pauli1 { qubit, pauli } => {
                write!(f, "t{} {}[{}]", self.timestep, pauli, qubit)
            }
            SiteKind::Pauli2 { q0, p0, q1, p1 } => {
                write!(f, "t{} {}[{}]{}[{}]", self.timestep, p0, q0, p1, q1)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FaultMechanism {
    pub id: usize,
    pub probability: f64,
    /// Z-basis detector ids flipped, ascending.
    pub z_footprint: Vec<u32>,
    /// X-basis detector ids flipped, ascending.
    pub x_footprint: Vec<u32>,
    pub observable_flip: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_z_detectors: usize,
    pub mechanisms: Vec<FaultMechanism>,
    /// Elementary site id -> owning mechanism, `None` when the site has no
    /// observable effect at all.
    pub site_mechanism: Vec<Option<u32>>,
}

/// Merge two independent firing probabilities of the same symptom.
#[inline]
pub fn merge_probability(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Extract the detector error model of `circuit` by single-fault
/// propagation of every site in `sites`.
pub fn extract_dem(
    circuit: &Circuit,
    indexing: &DetectorIndexing,
    sites: &FaultSites,
) -> Result<DetectorErrorModel> {
    let num_detectors = indexing.num_detectors();
    let footprints = batch_footprints(circuit, indexing, sites);

    struct Accum {
        z: Vec<u32>,
        x: Vec<u32>,
        obs: bool,
        prob: f64,
        provenance: Provenance,
    }
    let mut map: HashMap<(Vec<u32>, Vec<u32>, bool), usize> = HashMap::new();
    let mut accums: Vec<Accum> = Vec::new();
    let mut site_mechanism: Vec<Option<u32>> = vec![None; sites.sites.len()];

    for (site_id, (z, x, obs)) in footprints.into_iter().enumerate() {
        let site = &sites.sites[site_id];
        if z.is_empty() && x.is_empty() {
            if obs {
                return Err(Error::model(format!(
                    "undetectable logical fault at {}",
                    Provenance { timestep: site.timestep, site: site.kind }
                )));
            }
            continue;
        }
        let p = site.class.probability(circuit.p);
        let key = (z, x, obs);
        let idx = match map.get(&key) {
            Some(&idx) => {
                accums[idx].prob = merge_probability(accums[idx].prob, p);
                idx
            }
            None => {
                let idx = accums.len();
                accums.push(Accum {
                    z: key.0.clone(),
                    x: key.1.clone(),
                    obs,
                    prob: p,
                    provenance: Provenance { timestep: site.timestep, site: site.kind },
                });
                map.insert(key, idx);
                idx
            }
        };
        site_mechanism[site_id] = Some(idx as u32);
    }

    // Canonical mechanism order: by symptom. Keeps ids stable across runs
    // regardless of hash-map iteration.
    let mut order: Vec<usize> = (0..accums.len()).collect();
    order.sort_by(|&a, &b| {
        (&accums[a].z, &accums[a].x, accums[a].obs)
            .cmp(&(&accums[b].z, &accums[b].x, accums[b].obs))
    });
    let mut rank = vec![0u32; accums.len()];
    for (new_id, &old) in order.iter().enumerate() {
        rank[old] = new_id as u32;
    }
    for slot in site_mechanism.iter_mut().flatten() {
        *slot = rank[*slot as usize];
    }
    let mut mechanisms: Vec<FaultMechanism> = Vec::with_capacity(accums.len());
    let mut by_rank: Vec<Option<Accum>> = accums.into_iter().map(Some).collect();
    for (new_id, &old) in order.iter().enumerate() {
        let a = by_rank[old].take().expect("each accumulator moved once");
        mechanisms.push(FaultMechanism {
            id: new_id,
            probability: a.prob,
            z_footprint: a.z,
            x_footprint: a.x,
            observable_flip: a.obs,
            provenance: a.provenance,
        });
    }

    Ok(DetectorErrorModel {
        num_detectors,
        num_z_detectors: indexing.num_z_detectors,
        mechanisms,
        site_mechanism,
    })
}

/// Footprints of every site: (z detectors, x detectors, observable flip).
/// Sixty-four sites share one circuit walk, one bit lane each.
fn batch_footprints(
    circuit: &Circuit,
    indexing: &DetectorIndexing,
    sites: &FaultSites,
) -> Vec<(Vec<u32>, Vec<u32>, bool)> {
    let n_sites = sites.sites.len();
    let mut out = Vec::with_capacity(n_sites);
    let mut x = vec![0u64; circuit.num_qubits];
    let mut z = vec![0u64; circuit.num_qubits];
    let mut records = vec![0u64; circuit.record_count];

    for batch_start in (0..n_sites).step_by(64) {
        let lanes = (n_sites - batch_start).min(64);
        x.fill(0);
        z.fill(0);
        records.fill(0);
        let mut next_site = batch_start;
        let mut op_index = 0usize;
        for step in &circuit.timesteps {
            for op in step {
                match *op {
                    Op::ResetZ(q) | Op::ResetX(q) => {
                        x[q] = 0;
                        z[q] = 0;
                    }
                    Op::Cnot { control, target } => {
                        x[target] ^= x[control];
                        z[control] ^= z[target];
                    }
                    Op::MeasureZ { qubit, record } => records[record] ^= x[qubit],
                    Op::MeasureX { qubit, record } => records[record] ^= z[qubit],
                    Op::Idle(_) => {}
                }
                let end = sites.op_site_start[op_index + 1] as usize;
                while next_site < (batch_start + lanes).min(end) {
                    let lane = 1u64 << (next_site - batch_start);
                    match sites.sites[next_site].kind {
                        SiteKind::RecordFlip { record } => records[record as usize] ^= lane,
                        SiteKind::Pauli1 { qubit, pauli } => {
                            if pauli.x {
                                x[qubit as usize] ^= lane;
                            }
                            if pauli.z {
                                z[qubit as usize] ^= lane;
                            }
                        }
                        SiteKind::Pauli2 { q0, p0, q1, p1 } => {
                            if p0.x {
                                x[q0 as usize] ^= lane;
                            }
                            if p0.z {
                                z[q0 as usize] ^= lane;
                            }
                            if p1.x {
                                x[q1 as usize] ^= lane;
                            }
                            if p1.z {
                                z[q1 as usize] ^= lane;
                            }
                        }
                    }
                    next_site += 1;
                }
                op_index += 1;
            }
        }

        let mut lane_z: Vec<Vec<u32>> = vec![Vec::new(); lanes];
        let mut lane_x: Vec<Vec<u32>> = vec![Vec::new(); lanes];
        for (det, recs) in indexing.detector_records.iter().enumerate() {
            let mut mask = 0u64;
            for &r in recs {
                mask ^= records[r as usize];
            }
            while mask != 0 {
                let lane = mask.trailing_zeros() as usize;
                if det < indexing.num_z_detectors {
                    lane_z[lane].push(det as u32);
                } else {
                    lane_x[lane].push(det as u32);
                }
                mask &= mask - 1;
            }
        }
        let mut obs_mask = 0u64;
        for &r in &indexing.observable_records {
            obs_mask ^= records[r as usize];
        }
        for lane in 0..lanes {
            out.push((
                std::mem::take(&mut lane_z[lane]),
                std::mem::take(&mut lane_x[lane]),
                obs_mask >> lane & 1 != 0,
            ));
        }
    }
    out
}

/// Text dump, one mechanism per line: `error(p) Dz.. Dx.. L`, detector ids
/// ascending, `L` present when the mechanism flips the observable. Ids are
/// global detector ids under the canonical numbering.
pub fn dump_dem(dem: &DetectorErrorModel) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for m in &dem.mechanisms {
        let _ = write!(out, "error({})", m.probability);
        for d in &m.z_footprint {
            let _ = write!(out, " Dz{d}");
        }
        for d in &m.x_footprint {
            let _ = write!(out, " Dx{d}");
        }
        if m.observable_flip {
            out.push_str(" L");
        }
        out.push('\n');
    }
    out
}
