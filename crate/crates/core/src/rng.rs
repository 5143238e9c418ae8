//! Counter-based pseudo-random generation for reproducible sampling.
//!
//! Every shot owns an independent generator seeded with `seed_base + shot`,
//! so samples are identical no matter how shots are batched or threaded.

/// SplitMix64: a small counter-based generator with the standard finalizer
/// constants. Good enough statistically for Bernoulli noise sampling and
/// cheap enough to seed per shot.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.state)
    }

    /// Uniform draw in the half-open interval [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the open-closed interval (0, 1]. Never returns zero,
    /// which keeps `ln(u)` finite in geometric skip sampling.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// The SplitMix64 output finalizer as a stateless hash. Used wherever a
/// deterministic value must be derived from an integer identity (for example
/// the tie-breaking perturbation keyed on global edge ids).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of Bernoulli failures before the next success at probability `p`,
/// drawn by inversion. Returns `usize::MAX` when `p` is zero or negative so
/// callers can skip the whole trial sequence.
#[inline]
pub fn geometric_skip(rng: &mut SplitMix64, ln_one_minus_p: f64) -> usize {
    if ln_one_minus_p == 0.0 {
        return usize::MAX;
    }
    let u = rng.next_f64_open();
    let k = u.ln() / ln_one_minus_p;
    if k >= usize::MAX as f64 {
        usize::MAX
    } else {
        k as usize
    }
}
