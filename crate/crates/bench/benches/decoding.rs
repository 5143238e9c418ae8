//! Decoding throughput benchmarks: global MWPM per shot, windowed decoding
//! per shot, the raw matching layer on fixed defect sets, and pipeline
//! construction.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use swqec::{decode_windowed, max_weight_matching, mwpm, DecodeScratch};
use swqec_bench::BenchSetup;

fn bench_global_decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("global_decode_shot");
    for (d, rounds, p) in [(3, 9, 0.003), (5, 15, 0.003), (7, 21, 0.003)] {
        let setup = BenchSetup::new(d, rounds, p);
        let graph = setup.global_graph();
        let shots = setup.defect_shots(64, 1);
        group.throughput(Throughput::Elements(shots.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(d), &shots, |b, shots| {
            let mut scratch = DecodeScratch::new();
            b.iter(|| {
                let mut flips = 0u64;
                for defects in shots {
                    let local = graph.local_defects(defects);
                    let m = mwpm(&graph, &local, &mut scratch).unwrap();
                    flips += m.correction.len() as u64;
                }
                flips
            });
        });
    }
    group.finish();
}

fn bench_windowed_decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("windowed_decode_shot");
    for (d, rounds) in [(3, 9), (5, 15), (7, 21)] {
        let setup = BenchSetup::new(d, rounds, 0.003);
        let ws = setup.window_set(d, d);
        let shots = setup.defect_shots(64, 1);
        group.throughput(Throughput::Elements(shots.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(d), &shots, |b, shots| {
            let mut scratch = DecodeScratch::new();
            b.iter(|| {
                let mut residuals = 0usize;
                for defects in shots {
                    let wd = decode_windowed(&ws, defects, &mut scratch).unwrap();
                    residuals += wd.residual.len();
                }
                residuals
            });
        });
    }
    group.finish();
}

fn bench_blossom(c: &mut Criterion) {
    // Dense complete graphs, the raw matcher without any decoding context.
    let mut group = c.benchmark_group("blossom_complete_graph");
    for n in [8u32, 16, 32] {
        let mut edges = Vec::new();
        let mut state = 0x1234_5678_9abc_def0u64;
        for u in 0..n {
            for v in (u + 1)..n {
                state = swqec::rng::mix64(state);
                edges.push((u, v, (state % 1000) as i128));
            }
        }
        group.bench_with_input(BenchmarkId::from_parameter(n), &edges, |b, edges| {
            b.iter(|| max_weight_matching(n as usize, edges, true));
        });
    }
    group.finish();
}

fn bench_pipeline_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline_build");
    group.sample_size(10);
    for d in [3usize, 5, 7] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            b.iter(|| BenchSetup::new(d, 3 * d, 0.003));
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_global_decode,
    bench_windowed_decode,
    bench_blossom,
    bench_pipeline_build
);
criterion_main!(benches);
