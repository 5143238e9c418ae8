//! Shared fixtures for the decoding benchmarks.

use swqec::{DecodeScratch, MatchGraph, Pipeline, Sampler, WeightMode, WindowSet};

pub struct BenchSetup {
    pub pipeline: Pipeline,
}

impl BenchSetup {
    pub fn new(d: usize, rounds: usize, p: f64) -> Self {
        BenchSetup {
            pipeline: Pipeline::new(d, rounds, p).expect("valid benchmark parameters"),
        }
    }

    pub fn sampler(&self, seed: u64) -> Sampler<'_> {
        self.pipeline.sampler(seed)
    }

    pub fn global_graph(&self) -> MatchGraph {
        self.pipeline.global_match_graph().expect("global graph")
    }

    pub fn window_set(&self, core: usize, buffer: usize) -> WindowSet<'_> {
        self.pipeline.window_set(core, buffer).expect("window set")
    }

    /// Defect lists for `shots` consecutive shots.
    pub fn defect_shots(&self, shots: u64, seed: u64) -> Vec<Vec<u32>> {
        let sampler = self.sampler(seed);
        (0..shots)
            .map(|s| sampler.sample(s).z_defects(self.pipeline.dem.num_z_detectors))
            .collect()
    }
}

pub fn scratch() -> DecodeScratch {
    DecodeScratch::new()
}

/// Weight table handle for subgraph construction benchmarks.
pub fn shared_mode(pipeline: &Pipeline) -> WeightMode<'_> {
    WeightMode::Shared(&pipeline.weights)
}
