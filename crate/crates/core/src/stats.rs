//! Logical-error statistics.
//!
//! A memory experiment over N rounds either preserves the logical state or
//! flips it. Under an independent per-round flip rate e, the shot-level flip
//! probability is p_L = (1 - (1-2e)^N)/2; [`ler_per_round`] inverts that map
//! to normalize experiments of different lengths onto a per-round rate.
//! [`independence_estimate`] composes per-window error rates under the
//! assumption that windows fail independently, the reference point against
//! which correlated window failures show up.

use crate::error::{Error, Result};

/// Aggregated outcome of one memory-experiment run.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentStats {
    pub shots: u64,
    pub logical_errors: u64,
    pub rounds: usize,
    /// Shot-level logical error rate.
    pub p_l: f64,
    /// Normal-approximation standard error of `p_l`.
    pub std_err: f64,
    /// Per-round rate from [`ler_per_round`].
    pub ler_per_round: f64,
    /// 1 - 2 p_L.
    pub fidelity: f64,
    /// Fewer than 25 observed errors: the normal std_err is optimistic.
    pub low_counts: bool,
}

impl ExperimentStats {
    pub fn from_counts(shots: u64, logical_errors: u64, rounds: usize) -> Result<Self> {
        if shots == 0 {
            return Err(Error::invalid("cannot aggregate zero shots"));
        }
        if logical_errors > shots {
            return Err(Error::invalid("more errors than shots"));
        }
        let p_l = logical_errors as f64 / shots as f64;
        Ok(ExperimentStats {
            shots,
            logical_errors,
            rounds,
            p_l,
            std_err: (p_l * (1.0 - p_l) / shots as f64).sqrt(),
            ler_per_round: ler_per_round(p_l, rounds)?,
            fidelity: 1.0 - 2.0 * p_l,
            low_counts: logical_errors < 25,
        })
    }
}

/// Per-round logical error rate e with (1 - (1-2e)^N)/2 = p_L.
///
/// `p_l` values at or above one half carry no length information (the state
/// is fully scrambled) and clamp to e = 1/2.
pub fn ler_per_round(p_l: f64, rounds: usize) -> Result<f64> {
    if rounds < 1 {
        return Err(Error::invalid("per-round rate needs at least one round"));
    }
    if !(0.0..=1.0).contains(&p_l) {
        return Err(Error::invalid(format!("p_L = {p_l} outside [0, 1]")));
    }
    if p_l >= 0.5 {
        return Ok(0.5);
    }
    if rounds == 1 {
        return Ok(p_l);
    }
    // (1-2p)^(1/N) via expm1/log1p keeps 12+ significant digits for tiny p.
    Ok(-0.5 * f64::exp_m1(f64::ln_1p(-2.0 * p_l) / rounds as f64))
}

/// Forward map: shot-level p_L of N rounds at per-round rate `ler`.
pub fn p_l_after_rounds(ler: f64, rounds: usize) -> Result<f64> {
    if rounds < 1 {
        return Err(Error::invalid("per-round rate needs at least one round"));
    }
    if !(0.0..=0.5).contains(&ler) {
        return Err(Error::invalid(format!("per-round rate {ler} outside [0, 0.5]")));
    }
    if rounds == 1 {
        return Ok(ler);
    }
    Ok(-0.5 * f64::exp_m1(rounds as f64 * f64::ln_1p(-2.0 * ler)))
}

/// Probability that an odd number of independent Bernoulli(p_i) events fire:
/// (1 - prod(1 - 2 p_i))/2. For three windows this expands to
/// p1(1-p2)(1-p3) + (1-p1)p2(1-p3) + (1-p1)(1-p2)p3 + p1 p2 p3.
pub fn independence_estimate(rates: &[f64]) -> f64 {
    debug_assert!(rates.iter().all(|p| (0.0..=1.0).contains(p)));
    let prod: f64 = rates.iter().map(|p| 1.0 - 2.0 * p).product();
    (1.0 - prod) / 2.0
}
