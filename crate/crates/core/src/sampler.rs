//! Monte-Carlo shot sampling.
//!
//! Each shot draws an independent set of fired fault sites (geometric skip
//! sampling per probability class), propagates the Pauli frame through the
//! circuit, and reduces the measurement records to detector flips, the
//! observable flip, and the list of mechanisms fired an odd number of
//! times. Shots are seeded individually, so results do not depend on
//! batching or thread order.

use crate::bits::BitVec;
use crate::code::Circuit;
use crate::dem::DetectorErrorModel;
use crate::frame::{propagate_fired, DetectorIndexing, FaultSites};
use crate::rng::{geometric_skip, SplitMix64};

#[derive(Clone, Debug)]
pub struct SyndromeSample {
    /// All detector flips, Z detectors first.
    pub detectors: BitVec,
    pub observable_flip: bool,
    /// Mechanism ids triggered an odd number of times, ascending.
    pub triggered: Vec<u32>,
}

impl SyndromeSample {
    /// Fired Z-basis detector ids, ascending.
    pub fn z_defects(&self, num_z_detectors: usize) -> Vec<u32> {
        self.detectors
            .ones()
            .into_iter()
            .take_while(|&d| (d as usize) < num_z_detectors)
            .collect()
    }
}

pub struct Sampler<'a> {
    pub circuit: &'a Circuit,
    pub indexing: &'a DetectorIndexing,
    pub sites: &'a FaultSites,
    pub dem: &'a DetectorErrorModel,
    seed: u64,
    ln_survive: [f64; 3],
}

impl<'a> Sampler<'a> {
    pub fn new(
        circuit: &'a Circuit,
        indexing: &'a DetectorIndexing,
        sites: &'a FaultSites,
        dem: &'a DetectorErrorModel,
        seed: u64,
    ) -> Self {
        assert_eq!(
            sites.sites.len(),
            dem.site_mechanism.len(),
            "fault sites and model must come from the same circuit"
        );
        let classes = [
            crate::frame::ProbClass::Full,
            crate::frame::ProbClass::Third,
            crate::frame::ProbClass::Fifteenth,
        ];
        let ln_survive = classes.map(|c| (-c.probability(circuit.p)).ln_1p());
        Sampler { circuit, indexing, sites, dem, seed, ln_survive }
    }

    /// Fault sites fired in this shot, ascending.
    pub fn fired_sites(&self, shot: u64) -> Vec<u32> {
        let mut rng = SplitMix64::new(self.seed.wrapping_add(shot));
        let mut fired = Vec::new();
        for (class, class_sites) in self.sites.class_sites.iter().enumerate() {
            let ln1p = self.ln_survive[class];
            if ln1p == 0.0 {
                continue;
            }
            let mut i = geometric_skip(&mut rng, ln1p);
            while i < class_sites.len() {
                fired.push(class_sites[i]);
                i = i
                    .saturating_add(1)
                    .saturating_add(geometric_skip(&mut rng, ln1p));
            }
        }
        fired.sort_unstable();
        fired
    }

    pub fn sample(&self, shot: u64) -> SyndromeSample {
        self.realize(&self.fired_sites(shot))
    }

    /// Deterministic fault injection: propagate exactly the given fired
    /// sites (ascending site ids).
    pub fn realize(&self, fired: &[u32]) -> SyndromeSample {
        let mut records = BitVec::zeros(self.circuit.record_count);
        propagate_fired(self.circuit, self.sites, fired, &mut records);
        let detectors = self.indexing.detectors_from_records(&records);
        let observable_flip = self.indexing.observable_from_records(&records);

        let mut trig: Vec<u32> = fired
            .iter()
            .filter_map(|&s| self.dem.site_mechanism[s as usize])
            .collect();
        trig.sort_unstable();
        let mut triggered = Vec::with_capacity(trig.len());
        let mut i = 0;
        while i < trig.len() {
            let j = i;
            while i < trig.len() && trig[i] == trig[j] {
                i += 1;
            }
            if (i - j) % 2 == 1 {
                triggered.push(trig[j]);
            }
        }
        SyndromeSample { detectors, observable_flip, triggered }
    }

    /// First elementary site owned by a mechanism, for targeted injection.
    pub fn site_of_mechanism(&self, mechanism: u32) -> Option<u32> {
        self.dem
            .site_mechanism
            .iter()
            .position(|&m| m == Some(mechanism))
            .map(|s| s as u32)
    }
}
