//! End-to-end memory-experiment harnesses.
//!
//! [`Pipeline`] assembles the full chain (layout, noisy circuit, fault
//! sites, error model, decoding graph, edge weights) for one parameter
//! point; the harnesses sample shots, decode them globally or window by
//! window, and aggregate logical error statistics. All harnesses draw shot
//! `s` from the same seeded stream, so runs with different decode modes or
//! buffer sizes see identical noise realizations.

use crate::code::{build_layout, build_memory_circuit, CodeLayout, Circuit};
use crate::dem::{extract_dem, DetectorErrorModel};
use crate::error::{Error, Result};
use crate::frame::{enumerate_fault_sites, DetectorIndexing, FaultSites};
use crate::graph::{build_z_graph, DecodingGraph};
use crate::matching::{
    correction_flips_observable, mwpm, perturbed_weights, DecodeScratch, MatchGraph, WeightMode,
};
use crate::sampler::Sampler;
use crate::stats::{independence_estimate, ExperimentStats};
use crate::window::{decode_windowed, derive_labels, merge_decode, WindowKind, WindowSet};
use rayon::prelude::*;

/// Salt for the deterministic degeneracy-breaking weight perturbation.
const WEIGHT_SALT: u64 = 0x5EED;

/// Shots per parallel work unit.
const SHOT_CHUNK: usize = 256;

/// Everything derived from one (d, rounds, p) parameter point.
pub struct Pipeline {
    pub layout: CodeLayout,
    pub circuit: Circuit,
    pub indexing: DetectorIndexing,
    pub sites: FaultSites,
    pub dem: DetectorErrorModel,
    pub graph: DecodingGraph,
    pub weights: Vec<i64>,
}

impl Pipeline {
    pub fn new(d: usize, rounds: usize, p: f64) -> Result<Pipeline> {
        let layout = build_layout(d)?;
        let circuit = build_memory_circuit(&layout, rounds, p)?;
        let indexing = DetectorIndexing::new(&layout, rounds);
        let sites = enumerate_fault_sites(&circuit);
        let dem = extract_dem(&circuit, &indexing, &sites)?;
        let graph = build_z_graph(&dem, &indexing)?;
        let weights = perturbed_weights(&graph, WEIGHT_SALT);
        Ok(Pipeline {
            layout,
            circuit,
            indexing,
            sites,
            dem,
            graph,
            weights,
        })
    }

    pub fn sampler(&self, seed: u64) -> Sampler<'_> {
        Sampler::new(&self.circuit, &self.indexing, &self.sites, &self.dem, seed)
    }

    pub fn window_set(&self, core: usize, buffer: usize) -> Result<WindowSet<'_>> {
        WindowSet::build(&self.graph, core, buffer, WeightMode::Shared(&self.weights))
    }

    /// Matching graph over the whole round axis.
    pub fn global_match_graph(&self) -> Result<MatchGraph> {
        MatchGraph::build(
            &self.graph,
            0,
            self.graph.rounds,
            WeightMode::Shared(&self.weights),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Global,
    WindowedNoMerge,
    WindowedMerge,
}

impl std::str::FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<DecodeMode> {
        match s {
            "global" => Ok(DecodeMode::Global),
            "no-merge" => Ok(DecodeMode::WindowedNoMerge),
            "merge" => Ok(DecodeMode::WindowedMerge),
            other => Err(Error::invalid(format!(
                "unknown decode mode {other:?}; expected global, no-merge or merge"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MemoryRunConfig {
    pub d: usize,
    pub p: f64,
    pub rounds: usize,
    pub shots: u64,
    pub mode: DecodeMode,
    pub buffer: usize,
    pub core: usize,
    pub seed: u64,
}

/// Count failed shots over the chunked shot range with one scratch per unit.
fn count_errors<F>(shots: u64, per_shot: F) -> Result<u64>
where
    F: Fn(u64, &mut DecodeScratch) -> Result<bool> + Sync,
{
    let chunks: Vec<u64> = (0..shots)
        .step_by(SHOT_CHUNK)
        .collect();
    let totals = chunks
        .par_iter()
        .map(|&lo| {
            let hi = (lo + SHOT_CHUNK as u64).min(shots);
            let mut scratch = DecodeScratch::new();
            let mut errors = 0u64;
            for s in lo..hi {
                if per_shot(s, &mut scratch)? {
                    errors += 1;
                }
            }
            Ok(errors)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(totals.into_iter().sum())
}

/// Sample and decode `shots` memory-experiment shots, counting shots where
/// the decoded logical bit disagrees with the true observable flip.
pub fn run_memory_experiment(cfg: &MemoryRunConfig) -> Result<ExperimentStats> {
    let pipe = Pipeline::new(cfg.d, cfg.rounds, cfg.p)?;
    run_memory_experiment_on(&pipe, cfg)
}

/// As [`run_memory_experiment`], reusing an already-built pipeline.
pub fn run_memory_experiment_on(pipe: &Pipeline, cfg: &MemoryRunConfig) -> Result<ExperimentStats> {
    if pipe.graph.rounds != cfg.rounds {
        return Err(Error::invalid("pipeline was built for a different length"));
    }
    let sampler = pipe.sampler(cfg.seed);
    let num_z = pipe.dem.num_z_detectors;

    let errors = match cfg.mode {
        DecodeMode::Global => {
            let mg = pipe.global_match_graph()?;
            count_errors(cfg.shots, |s, scratch| {
                let sample = sampler.sample(s);
                let defects = sample.z_defects(num_z);
                let matching = mwpm(&mg, &mg.local_defects(&defects), scratch)?;
                let flip = correction_flips_observable(&pipe.graph, &matching.correction);
                Ok(flip != sample.observable_flip)
            })?
        }
        DecodeMode::WindowedNoMerge => {
            let ws = pipe.window_set(cfg.core, cfg.buffer)?;
            count_errors(cfg.shots, |s, scratch| {
                let sample = sampler.sample(s);
                let defects = sample.z_defects(num_z);
                let wd = decode_windowed(&ws, &defects, scratch)?;
                Ok(wd.predicted_flip != sample.observable_flip)
            })?
        }
        DecodeMode::WindowedMerge => {
            let ws = pipe.window_set(cfg.core, cfg.buffer)?;
            let full = pipe.global_match_graph()?;
            count_errors(cfg.shots, |s, scratch| {
                let sample = sampler.sample(s);
                let defects = sample.z_defects(num_z);
                let wd = decode_windowed(&ws, &defects, scratch)?;
                let mut flip = wd.predicted_flip;
                if !wd.residual.is_empty() {
                    let repair = merge_decode(&full, &wd.residual, scratch)?;
                    flip ^= correction_flips_observable(&pipe.graph, &repair.correction);
                }
                Ok(flip != sample.observable_flip)
            })?
        }
    };
    ExperimentStats::from_counts(cfg.shots, errors, cfg.rounds)
}

/// Per-window error rates against the per-window ground-truth labels.
#[derive(Debug, Clone)]
pub struct WindowStatsReport {
    pub shots: u64,
    pub kinds: Vec<WindowKind>,
    /// Shots where window i's verdict differs from its label.
    pub window_errors: Vec<u64>,
    pub window_rates: Vec<f64>,
    /// Shots where the combined bit differs from the observable flip.
    pub combined_errors: u64,
    /// Measured combined error rate.
    pub p_g: f64,
    /// Combined rate predicted from the per-window rates assuming
    /// independent window failures.
    pub p_hat_g: f64,
}

pub fn window_stats(
    d: usize,
    p: f64,
    rounds: usize,
    shots: u64,
    buffer: usize,
    core: usize,
    seed: u64,
) -> Result<WindowStatsReport> {
    let pipe = Pipeline::new(d, rounds, p)?;
    let ws = pipe.window_set(core, buffer)?;
    let sampler = pipe.sampler(seed);
    let num_z = pipe.dem.num_z_detectors;
    let m = ws.num_windows();

    let chunks: Vec<u64> = (0..shots).step_by(SHOT_CHUNK).collect();
    let partials = chunks
        .par_iter()
        .map(|&lo| {
            let hi = (lo + SHOT_CHUNK as u64).min(shots);
            let mut scratch = DecodeScratch::new();
            let mut window_errors = vec![0u64; m];
            let mut combined_errors = 0u64;
            for s in lo..hi {
                let sample = sampler.sample(s);
                let defects = sample.z_defects(num_z);
                let wd = decode_windowed(&ws, &defects, &mut scratch)?;
                let labels =
                    derive_labels(&pipe.graph, &pipe.dem, &sample.triggered, m, core);
                for i in 0..m {
                    if wd.outcomes[i].flip != labels[i] {
                        window_errors[i] += 1;
                    }
                }
                if wd.predicted_flip != sample.observable_flip {
                    combined_errors += 1;
                }
            }
            Ok((window_errors, combined_errors))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut window_errors = vec![0u64; m];
    let mut combined_errors = 0u64;
    for (we, ce) in partials {
        for (acc, e) in window_errors.iter_mut().zip(we) {
            *acc += e;
        }
        combined_errors += ce;
    }
    let window_rates: Vec<f64> = window_errors
        .iter()
        .map(|&e| e as f64 / shots as f64)
        .collect();
    Ok(WindowStatsReport {
        shots,
        kinds: ws.specs.iter().map(|s| s.kind).collect(),
        p_hat_g: independence_estimate(&window_rates),
        p_g: combined_errors as f64 / shots as f64,
        window_errors,
        window_rates,
        combined_errors,
    })
}

/// One buffer size of [`buffer_sweep`]: the two windowed modes next to the
/// global baseline, all over the same shots.
#[derive(Debug, Clone, Copy)]
pub struct BufferSweepRow {
    pub buffer: usize,
    pub global: ExperimentStats,
    pub no_merge: ExperimentStats,
    pub merge: ExperimentStats,
}

pub fn buffer_sweep(
    d: usize,
    p: f64,
    rounds: usize,
    shots: u64,
    buffers: &[usize],
    core: usize,
    seed: u64,
) -> Result<Vec<BufferSweepRow>> {
    let pipe = Pipeline::new(d, rounds, p)?;
    let global = run_memory_experiment_on(
        &pipe,
        &MemoryRunConfig {
            d,
            p,
            rounds,
            shots,
            mode: DecodeMode::Global,
            buffer: 0,
            core,
            seed,
        },
    )?;
    let full = pipe.global_match_graph()?;
    let sampler = pipe.sampler(seed);
    let num_z = pipe.dem.num_z_detectors;
    let mut rows = Vec::with_capacity(buffers.len());
    for &buffer in buffers {
        // One windowed decode per shot serves both modes; the merge verdict
        // only adds the residual repair on top.
        let ws = pipe.window_set(core, buffer)?;
        let chunks: Vec<u64> = (0..shots).step_by(SHOT_CHUNK).collect();
        let partials = chunks
            .par_iter()
            .map(|&lo| {
                let hi = (lo + SHOT_CHUNK as u64).min(shots);
                let mut scratch = DecodeScratch::new();
                let mut no_merge_errors = 0u64;
                let mut merge_errors = 0u64;
                for s in lo..hi {
                    let sample = sampler.sample(s);
                    let defects = sample.z_defects(num_z);
                    let wd = decode_windowed(&ws, &defects, &mut scratch)?;
                    no_merge_errors += (wd.predicted_flip != sample.observable_flip) as u64;
                    let mut flip = wd.predicted_flip;
                    if !wd.residual.is_empty() {
                        let repair = merge_decode(&full, &wd.residual, &mut scratch)?;
                        flip ^= correction_flips_observable(&pipe.graph, &repair.correction);
                    }
                    merge_errors += (flip != sample.observable_flip) as u64;
                }
                Ok((no_merge_errors, merge_errors))
            })
            .collect::<Result<Vec<_>>>()?;
        let (no_merge_errors, merge_errors) = partials
            .into_iter()
            .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        rows.push(BufferSweepRow {
            buffer,
            global,
            no_merge: ExperimentStats::from_counts(shots, no_merge_errors, rounds)?,
            merge: ExperimentStats::from_counts(shots, merge_errors, rounds)?,
        });
    }
    Ok(rows)
}

/// One grid point of [`threshold_sweep`].
#[derive(Debug, Clone, Copy)]
pub struct ThresholdPoint {
    pub d: usize,
    pub p: f64,
    pub stats: ExperimentStats,
}

/// Global-MWPM logical error rates over a (d, p) grid with d rounds per
/// distance, the standard memory-experiment threshold protocol.
pub fn threshold_sweep(
    ds: &[usize],
    ps: &[f64],
    shots: u64,
    seed: u64,
) -> Result<Vec<ThresholdPoint>> {
    let mut points = Vec::with_capacity(ds.len() * ps.len());
    for &d in ds {
        for &p in ps {
            let stats = run_memory_experiment(&MemoryRunConfig {
                d,
                p,
                rounds: d,
                shots,
                mode: DecodeMode::Global,
                buffer: 0,
                core: d,
                seed,
            })?;
            points.push(ThresholdPoint { d, p, stats });
        }
    }
    Ok(points)
}

/// Threshold estimate: mean crossing abscissa of adjacent-distance p_L
/// curves, linearly interpolated in log p_L. `None` when no adjacent pair
/// crosses inside the grid (or error counts are too sparse to take logs).
pub fn threshold_estimate(points: &[ThresholdPoint]) -> Option<f64> {
    let mut ds: Vec<usize> = points.iter().map(|pt| pt.d).collect();
    ds.sort_unstable();
    ds.dedup();
    let curve = |d: usize| {
        let mut c: Vec<(f64, f64)> = points
            .iter()
            .filter(|pt| pt.d == d && pt.stats.p_l > 0.0)
            .map(|pt| (pt.p, pt.stats.p_l.ln()))
            .collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        c
    };
    let mut crossings = Vec::new();
    for pair in ds.windows(2) {
        let (lo, hi) = (curve(pair[0]), curve(pair[1]));
        // Shared abscissas only: both curves need a log at the same p.
        let diffs: Vec<(f64, f64)> = lo
            .iter()
            .filter_map(|&(p, la)| {
                hi.iter()
                    .find(|&&(q, _)| (q - p).abs() < 1e-12)
                    .map(|&(_, lb)| (p, la - lb))
            })
            .collect();
        for w in diffs.windows(2) {
            let (p0, d0) = w[0];
            let (p1, d1) = w[1];
            if d0 == 0.0 {
                crossings.push(p0);
            } else if d0.signum() != d1.signum() {
                crossings.push(p0 + (p1 - p0) * d0 / (d0 - d1));
            }
        }
    }
    if crossings.is_empty() {
        None
    } else {
        Some(crossings.iter().sum::<f64>() / crossings.len() as f64)
    }
}

/// Decoder-free view of the sampled noise.
#[derive(Debug, Clone, Copy)]
pub struct SamplingSummary {
    pub shots: u64,
    /// Mean fraction of fired detectors (both bases).
    pub event_density: f64,
    /// Mean Z-basis defects per shot, the matching problem size.
    pub mean_defects: f64,
    /// Fraction of shots whose observable actually flipped.
    pub flip_rate: f64,
}

/// Sample without decoding and summarize the syndrome stream.
pub fn sampling_summary(
    d: usize,
    p: f64,
    rounds: usize,
    shots: u64,
    seed: u64,
) -> Result<SamplingSummary> {
    let pipe = Pipeline::new(d, rounds, p)?;
    let sampler = pipe.sampler(seed);
    let num = pipe.indexing.num_detectors();
    let num_z = pipe.dem.num_z_detectors;
    let chunks: Vec<u64> = (0..shots).step_by(SHOT_CHUNK).collect();
    let partials: Vec<(u64, u64, u64)> = chunks
        .par_iter()
        .map(|&lo| {
            let hi = (lo + SHOT_CHUNK as u64).min(shots);
            let mut fired = 0u64;
            let mut defects = 0u64;
            let mut flips = 0u64;
            for s in lo..hi {
                let sample = sampler.sample(s);
                fired += sample.detectors.count_ones() as u64;
                defects += sample.z_defects(num_z).len() as u64;
                flips += sample.observable_flip as u64;
            }
            (fired, defects, flips)
        })
        .collect();
    let (fired, defects, flips) = partials
        .into_iter()
        .fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(SamplingSummary {
        shots,
        event_density: fired as f64 / (num as u64 * shots) as f64,
        mean_defects: defects as f64 / shots as f64,
        flip_rate: flips as f64 / shots as f64,
    })
}

/// Mean fraction of fired detectors (both bases) per shot.
pub fn event_density(d: usize, p: f64, rounds: usize, shots: u64, seed: u64) -> Result<f64> {
    let pipe = Pipeline::new(d, rounds, p)?;
    let sampler = pipe.sampler(seed);
    let num = pipe.indexing.num_detectors();
    let chunks: Vec<u64> = (0..shots).step_by(SHOT_CHUNK).collect();
    let fired: u64 = chunks
        .par_iter()
        .map(|&lo| {
            let hi = (lo + SHOT_CHUNK as u64).min(shots);
            (lo..hi)
                .map(|s| sampler.sample(s).detectors.count_ones() as u64)
                .sum::<u64>()
        })
        .sum();
    Ok(fired as f64 / (num as u64 * shots) as f64)
}
