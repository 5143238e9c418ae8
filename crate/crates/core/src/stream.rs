//! Streaming orchestration of window decoding.
//!
//! Two layers share one timing model. [`run_stream`] decodes real shots on a
//! pool of worker threads, one window per task, and XOR-combines the window
//! verdicts into the per-shot logical bit; the combination is order-free, so
//! the bits are identical for every worker count. [`simulate_latency`] is the
//! discrete-event view of the same schedule with no decoding at all: rounds
//! arrive at a fixed cadence, a window becomes ready when its last layer has
//! arrived, and each window occupies one of `workers` identical decoders for
//! a fixed service time.

use crate::error::{Error, Result};
use crate::matching::DecodeScratch;
use crate::window::{decode_one_window, plan_windows, WindowSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

/// Timing model of a streamed memory experiment.
#[derive(Debug, Clone, Copy)]
pub struct StreamConfig {
    /// Microseconds per syndrome extraction round.
    pub t_round: f64,
    /// Microseconds to decode one window.
    pub t_window: f64,
    /// Number of concurrent window decoders.
    pub workers: usize,
    /// Buffer thickness in rounds.
    pub buffer: usize,
    /// Core thickness in rounds.
    pub core: usize,
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::invalid("worker pool must not be empty"));
        }
        if self.core == 0 {
            return Err(Error::invalid("core must span at least one round"));
        }
        if !(self.t_round > 0.0) || !(self.t_window > 0.0) {
            return Err(Error::invalid("round and window times must be positive"));
        }
        Ok(())
    }

    /// Rate balance: the pool keeps up with the syndrome source iff one
    /// window is decoded in the time the source emits `workers` cores.
    pub fn sufficient(&self) -> bool {
        self.t_window <= self.workers as f64 * self.core as f64 * self.t_round
    }
}

/// Modeled schedule of one window.
#[derive(Debug, Clone, Copy)]
pub struct WindowTiming {
    /// Arrival time of the window's last layer.
    pub ready: f64,
    /// Time a decoder picked the window up.
    pub start: f64,
    /// `start` plus the fixed decode time.
    pub finish: f64,
}

/// Latency profile of one streamed shot.
#[derive(Debug, Clone)]
pub struct LatencyTrace {
    pub windows: Vec<WindowTiming>,
    /// Per round: finish time of the window owning it minus the time the
    /// round was generated.
    pub round_latency: Vec<f64>,
    pub peak_latency: f64,
    /// Mean latency over the final quarter of the rounds.
    pub asymptotic_latency: f64,
    /// Least-squares slope of latency against round index over the final
    /// half, in microseconds per round. Near zero when the pool keeps up,
    /// `t_window/(workers*core) - t_round` when it does not.
    pub growth_rate: f64,
}

/// Discrete-event schedule of `rounds` streamed rounds under `config`.
///
/// Window `i` becomes ready when its last full layer arrives and is then
/// dispatched FIFO to the first free decoder. No decoding happens here; the
/// trace is the pure queueing behaviour of the configuration.
pub fn simulate_latency(config: &StreamConfig, rounds: usize) -> Result<LatencyTrace> {
    config.validate()?;
    let specs = plan_windows(rounds, config.core, config.buffer)?;

    let mut free_at = vec![0.0f64; config.workers];
    let mut windows = Vec::with_capacity(specs.len());
    for spec in &specs {
        let ready = spec.full_hi as f64 * config.t_round;
        // FIFO onto the earliest-free decoder.
        let slot = free_at
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let start = ready.max(free_at[slot]);
        let finish = start + config.t_window;
        free_at[slot] = finish;
        windows.push(WindowTiming {
            ready,
            start,
            finish,
        });
    }

    let round_latency: Vec<f64> = (0..rounds)
        .map(|k| {
            let generated = (k + 1) as f64 * config.t_round;
            windows[k / config.core].finish - generated
        })
        .collect();
    let peak_latency = round_latency.iter().copied().fold(f64::MIN, f64::max);
    let tail = &round_latency[rounds - rounds / 4 - 1..];
    let asymptotic_latency = tail.iter().sum::<f64>() / tail.len() as f64;
    let growth_rate = fit_slope(&round_latency[rounds / 2..]);

    Ok(LatencyTrace {
        windows,
        round_latency,
        peak_latency,
        asymptotic_latency,
        growth_rate,
    })
}

/// Least-squares slope of `ys` against its index.
fn fit_slope(ys: &[f64]) -> f64 {
    if ys.len() < 2 {
        return 0.0;
    }
    let n = ys.len() as f64;
    let mean_x = (ys.len() - 1) as f64 / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    num / den
}

/// Decode a batch of shots with `config.workers` real threads, one window
/// per task, dispatched FIFO in stream order (shot by shot, window by
/// window). Returns the per-shot logical bits and the modeled latency trace
/// of a single shot.
///
/// The bits equal [`crate::window::decode_windowed`]'s `predicted_flip`
/// exactly for every worker count: each task runs the same single-window
/// decode and the XOR combination is order-free.
pub fn run_stream(
    ws: &WindowSet,
    shots: &[Vec<u32>],
    config: &StreamConfig,
) -> Result<(Vec<bool>, LatencyTrace)> {
    config.validate()?;
    if config.core != ws.core || config.buffer != ws.buffer {
        return Err(Error::invalid(
            "stream config window geometry differs from the window set",
        ));
    }
    let trace = simulate_latency(config, ws.graph.rounds)?;

    let num_windows = ws.num_windows();
    let total = shots.len() * num_windows;
    let bits: Vec<AtomicBool> = (0..shots.len()).map(|_| AtomicBool::new(false)).collect();
    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..config.workers.min(total.max(1)) {
            scope.spawn(|| {
                let mut scratch = DecodeScratch::new();
                loop {
                    let task = next.fetch_add(1, Ordering::Relaxed);
                    if task >= total {
                        break;
                    }
                    let shot = task / num_windows;
                    let window = task % num_windows;
                    match decode_one_window(ws, window, &shots[shot], &mut scratch) {
                        Ok(outcome) => {
                            if outcome.flip {
                                bits[shot].fetch_xor(true, Ordering::Relaxed);
                            }
                        }
                        Err(e) => {
                            *failure.lock().unwrap() = Some(e);
                            break;
                        }
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let bits = bits.into_iter().map(AtomicBool::into_inner).collect();
    Ok((bits, trace))
}
