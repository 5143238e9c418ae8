//! Rotated surface code memory experiments with sliding-window MWPM decoding.
//!
//! The crate covers the full pipeline: circuit-level noise model and Pauli
//! frame sampling, detector error model extraction, matching-graph
//! construction, exact minimum-weight perfect matching with deterministic
//! tie-breaking, merge-free window decoding with per-window labels, stream
//! latency modeling, experiment harnesses, and a packed training-dataset
//! container.

pub mod bits;
pub mod blossom;
pub mod code;
pub mod dataset;
pub mod dem;
pub mod error;
pub mod experiment;
pub mod frame;
pub mod graph;
pub mod matching;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod stream;
pub mod window;

pub use bits::BitVec;
pub use blossom::max_weight_matching;
pub use code::{build_layout, build_memory_circuit, Basis, Circuit, CodeLayout, Noise, Op, Stabilizer};
pub use dataset::{
    export_windows, read_dataset, tensor_bits, window_tensor, write_dataset, DatasetHeader,
    DatasetReader, WindowSampleRecord, DATASET_MAGIC, DATASET_VERSION,
};
pub use dem::{dump_dem, extract_dem, DetectorErrorModel, FaultMechanism};
pub use error::{Error, Result};
pub use experiment::{
    buffer_sweep, event_density, run_memory_experiment, run_memory_experiment_on,
    sampling_summary, threshold_estimate, threshold_sweep, window_stats, BufferSweepRow,
    DecodeMode, MemoryRunConfig, Pipeline, SamplingSummary, ThresholdPoint, WindowStatsReport,
};
pub use frame::{enumerate_fault_sites, DetectorIndexing, FaultSite, FaultSites, ProbClass, SiteKind};
pub use graph::{build_z_graph, weighted_buffer_size, CutSide, DecodingGraph, GraphEdge};
pub use matching::{
    brute_force_mwpm, correction_flips_observable, mwpm, perturbed_weights, shortest_path_edges,
    DecodeScratch, MatchGraph, Matching, WeightMode,
};
pub use sampler::{Sampler, SyndromeSample};
pub use stats::{independence_estimate, ler_per_round, p_l_after_rounds, ExperimentStats};
pub use stream::{run_stream, simulate_latency, LatencyTrace, StreamConfig, WindowTiming};
pub use window::{
    check_seam_bound, decode_one_window, decode_windowed, derive_labels, merge_decode,
    plan_windows, residual_defects, SeamCheck, WindowKind, WindowSet, WindowSpec, WindowedDecode,
};
