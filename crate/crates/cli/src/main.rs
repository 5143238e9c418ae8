//! Command-line front end for the sliding-window decoding experiments.

mod table;

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use swqec::{
    buffer_sweep, event_density, export_windows, run_memory_experiment, sampling_summary,
    simulate_latency, threshold_estimate, threshold_sweep, window_stats, DecodeMode,
    MemoryRunConfig, Pipeline, StreamConfig, WindowKind,
};
use table::{Cell, Table};

#[derive(Parser)]
#[command(
    name = "swqec",
    version,
    about = "Rotated surface code memory experiments with sliding-window MWPM decoding"
)]
struct Cli {
    /// Worker threads for shot-parallel harnesses (also the decoder count
    /// in latency-sim).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample syndromes without decoding and summarize the stream.
    Simulate(SimulateArgs),
    /// Run a memory experiment under a decode mode and report error rates.
    Decode(DecodeArgs),
    /// Windowed vs global logical error rate across buffer sizes.
    BufferSweep(BufferSweepArgs),
    /// Global-MWPM logical error rates over a (d, p) grid, d rounds each.
    ThresholdSweep(ThresholdSweepArgs),
    /// Per-window error rates against ground-truth labels.
    WindowStats(WindowStatsArgs),
    /// Mean fraction of fired detectors.
    EventDensity(EventDensityArgs),
    /// Discrete-event latency model of the streaming decoder pool.
    LatencySim(LatencySimArgs),
    /// Export per-window training records to the binary container.
    ExportDataset(ExportDatasetArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Code distance.
    #[arg(long)]
    d: usize,
    /// Depolarizing strength of the circuit noise model.
    #[arg(long)]
    p: f64,
    /// Syndrome measurement rounds.
    #[arg(long)]
    rounds: usize,
    #[arg(long, default_value_t = 1000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; CSV unless it ends in .json. Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// global, no-merge or merge.
    #[arg(long, default_value = "global")]
    mode: DecodeMode,
    /// Buffer rounds per window (windowed modes).
    #[arg(long, default_value_t = 0)]
    buffer: usize,
    /// Core rounds per window; must divide --rounds. Defaults to --rounds.
    #[arg(long)]
    core: Option<usize>,
}

#[derive(Args)]
struct BufferSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Buffer sizes to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5, 6, 7, 8, 9])]
    buffer: Vec<usize>,
    #[arg(long)]
    core: usize,
}

#[derive(Args)]
struct ThresholdSweepArgs {
    /// Code distances (each runs d rounds).
    #[arg(long, value_delimiter = ',', default_values_t = [3, 5, 7])]
    d: Vec<usize>,
    /// Physical error rates.
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = [0.004, 0.005, 0.0055, 0.006, 0.0065, 0.007, 0.008, 0.009]
    )]
    p: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WindowStatsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    buffer: usize,
    #[arg(long)]
    core: usize,
}

#[derive(Args)]
struct EventDensityArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LatencySimArgs {
    /// Rounds to stream.
    #[arg(long, default_value_t = 1000)]
    rounds: usize,
    /// Microseconds per syndrome round.
    #[arg(long, default_value_t = 1.0)]
    t_round: f64,
    /// Microseconds to decode one window.
    #[arg(long)]
    t_window: f64,
    #[arg(long)]
    buffer: usize,
    #[arg(long)]
    core: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDatasetArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    buffer: usize,
    #[arg(long)]
    core: usize,
}

fn kind_name(kind: WindowKind) -> &'static str {
    match kind {
        WindowKind::Start => "start",
        WindowKind::Bulk => "bulk",
        WindowKind::Final => "final",
        WindowKind::Sole => "sole",
    }
}

fn stats_cells(stats: &swqec::ExperimentStats) -> Vec<Cell> {
    vec![
        Cell::UInt(stats.logical_errors),
        Cell::Float(stats.p_l),
        Cell::Float(stats.std_err),
        Cell::Float(stats.ler_per_round),
    ]
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()?;
    }

    match cli.command {
        Command::Simulate(args) => {
            let c = args.common;
            let summary = sampling_summary(c.d, c.p, c.rounds, c.shots, c.seed)?;
            let mut t = Table::new(vec![
                "d",
                "p",
                "rounds",
                "shots",
                "seed",
                "event_density",
                "mean_defects",
                "flip_rate",
            ]);
            t.row(vec![
                Cell::UInt(c.d as u64),
                Cell::Float(c.p),
                Cell::UInt(c.rounds as u64),
                Cell::UInt(c.shots),
                Cell::UInt(c.seed),
                Cell::Float(summary.event_density),
                Cell::Float(summary.mean_defects),
                Cell::Float(summary.flip_rate),
            ]);
            t.emit(c.out.as_deref())?;
        }
        Command::Decode(args) => {
            let c = args.common;
            let core = args.core.unwrap_or(c.rounds);
            let stats = run_memory_experiment(&MemoryRunConfig {
                d: c.d,
                p: c.p,
                rounds: c.rounds,
                shots: c.shots,
                mode: args.mode,
                buffer: args.buffer,
                core,
                seed: c.seed,
            })?;
            let mut t = Table::new(vec![
                "d",
                "p",
                "rounds",
                "shots",
                "mode",
                "buffer",
                "core",
                "seed",
                "errors",
                "p_l",
                "std_err",
                "ler_per_round",
                "fidelity",
                "low_counts",
            ]);
            let mode = match args.mode {
                DecodeMode::Global => "global",
                DecodeMode::WindowedNoMerge => "no-merge",
                DecodeMode::WindowedMerge => "merge",
            };
            t.row(vec![
                Cell::UInt(c.d as u64),
                Cell::Float(c.p),
                Cell::UInt(c.rounds as u64),
                Cell::UInt(c.shots),
                Cell::Text(mode.into()),
                Cell::UInt(args.buffer as u64),
                Cell::UInt(core as u64),
                Cell::UInt(c.seed),
                Cell::UInt(stats.logical_errors),
                Cell::Float(stats.p_l),
                Cell::Float(stats.std_err),
                Cell::Float(stats.ler_per_round),
                Cell::Float(stats.fidelity),
                Cell::Bool(stats.low_counts),
            ]);
            t.emit(c.out.as_deref())?;
        }
        Command::BufferSweep(args) => {
            let c = args.common;
            let rows = buffer_sweep(c.d, c.p, c.rounds, c.shots, &args.buffer, args.core, c.seed)?;
            let mut t = Table::new(vec![
                "buffer",
                "shots",
                "global_errors",
                "global_p_l",
                "global_std_err",
                "global_ler_per_round",
                "no_merge_errors",
                "no_merge_p_l",
                "no_merge_std_err",
                "no_merge_ler_per_round",
                "merge_errors",
                "merge_p_l",
                "merge_std_err",
                "merge_ler_per_round",
            ]);
            for row in &rows {
                let mut cells = vec![Cell::UInt(row.buffer as u64), Cell::UInt(c.shots)];
                cells.extend(stats_cells(&row.global));
                cells.extend(stats_cells(&row.no_merge));
                cells.extend(stats_cells(&row.merge));
                t.row(cells);
            }
            t.emit(c.out.as_deref())?;
        }
        Command::ThresholdSweep(args) => {
            let points = threshold_sweep(&args.d, &args.p, args.shots, args.seed)?;
            let mut t = Table::new(vec![
                "d", "p", "rounds", "shots", "errors", "p_l", "std_err",
            ]);
            for pt in &points {
                t.row(vec![
                    Cell::UInt(pt.d as u64),
                    Cell::Float(pt.p),
                    Cell::UInt(pt.d as u64),
                    Cell::UInt(args.shots),
                    Cell::UInt(pt.stats.logical_errors),
                    Cell::Float(pt.stats.p_l),
                    Cell::Float(pt.stats.std_err),
                ]);
            }
            t.emit(args.out.as_deref())?;
            match threshold_estimate(&points) {
                Some(th) => eprintln!("threshold_estimate={th}"),
                None => eprintln!("threshold_estimate=none (no crossing in grid)"),
            }
        }
        Command::WindowStats(args) => {
            let c = args.common;
            let report = window_stats(c.d, c.p, c.rounds, c.shots, args.buffer, args.core, c.seed)?;
            let mut t = Table::new(vec!["window", "kind", "shots", "errors", "rate"]);
            for (i, kind) in report.kinds.iter().enumerate() {
                t.row(vec![
                    Cell::UInt(i as u64),
                    Cell::Text(kind_name(*kind).into()),
                    Cell::UInt(c.shots),
                    Cell::UInt(report.window_errors[i]),
                    Cell::Float(report.window_rates[i]),
                ]);
            }
            t.emit(c.out.as_deref())?;
            eprintln!("p_g={} p_hat_g={}", report.p_g, report.p_hat_g);
        }
        Command::EventDensity(args) => {
            let c = args.common;
            let density = event_density(c.d, c.p, c.rounds, c.shots, c.seed)?;
            let mut t = Table::new(vec!["d", "p", "rounds", "shots", "density"]);
            t.row(vec![
                Cell::UInt(c.d as u64),
                Cell::Float(c.p),
                Cell::UInt(c.rounds as u64),
                Cell::UInt(c.shots),
                Cell::Float(density),
            ]);
            t.emit(c.out.as_deref())?;
        }
        Command::LatencySim(args) => {
            let config = StreamConfig {
                t_round: args.t_round,
                t_window: args.t_window,
                workers: cli.workers.unwrap_or(1),
                buffer: args.buffer,
                core: args.core,
            };
            let trace = simulate_latency(&config, args.rounds)?;
            let mut t = Table::new(vec![
                "round",
                "generated_time",
                "decoded_through_time",
                "latency_us",
            ]);
            for (k, &latency) in trace.round_latency.iter().enumerate() {
                let generated = (k + 1) as f64 * config.t_round;
                t.row(vec![
                    Cell::UInt((k + 1) as u64),
                    Cell::Float(generated),
                    Cell::Float(generated + latency),
                    Cell::Float(latency),
                ]);
            }
            t.emit(args.out.as_deref())?;
            eprintln!(
                "sufficient={} peak_latency={} asymptotic_latency={} growth_rate={}",
                config.sufficient(),
                trace.peak_latency,
                trace.asymptotic_latency,
                trace.growth_rate
            );
        }
        Command::ExportDataset(args) => {
            let c = args.common;
            let out = c
                .out
                .ok_or("export-dataset needs --out for the binary container")?;
            let pipe = Pipeline::new(c.d, c.rounds, c.p)?;
            let file = BufWriter::new(File::create(&out)?);
            let count = export_windows(file, &pipe, args.buffer, args.core, c.shots, c.seed)?;
            eprintln!("wrote {count} records to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
