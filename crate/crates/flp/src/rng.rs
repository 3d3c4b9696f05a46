//! Deterministic random number generation.
//!
//! All stochastic parts of the engine and the simulator draw from [`Lcg`], a
//! 32-bit linear congruential generator. It is cheap (one multiply-add per
//! draw), has no heap state, and makes every run bit-reproducible from a
//! single `u32` seed.

/// Multiplier of the recurrence (full period modulo 2^32).
pub const LCG_MULTIPLIER: u32 = 1_664_525;
/// Increment of the recurrence.
pub const LCG_INCREMENT: u32 = 1_013_904_223;

/// Advances the recurrence once and returns the new state together with a
/// uniform float in `[0, 1)` derived from it.
pub fn lcg_next(state: u32) -> (u32, f64) {
    let next = state
        .wrapping_mul(LCG_MULTIPLIER)
        .wrapping_add(LCG_INCREMENT);
    (next, next as f64 / 4_294_967_296.0)
}

/// 32-bit linear congruential generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lcg {
    state: u32,
}

impl Lcg {
    pub fn new(seed: u32) -> Self {
        Lcg { state: seed }
    }

    /// Derives an independent stream for a sub-task, so that e.g. trace
    /// synthesis and the filter never share draws.
    pub fn split(&self, stream: u32) -> Lcg {
        // One round of the recurrence on (seed xor golden-ratio-scrambled id).
        let mixed = self.state ^ stream.wrapping_mul(0x9E37_79B9);
        Lcg::new(
            mixed
                .wrapping_mul(LCG_MULTIPLIER)
                .wrapping_add(LCG_INCREMENT),
        )
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self
            .state
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.next_u32() as f64 / 4_294_967_296.0
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `[0, n)`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let i = (self.next_f64() * n as f64) as usize;
        i.min(n - 1)
    }

    /// Standard normal draw via Box-Muller (cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        // u1 in (0, 1] so the log never sees zero.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Normal draw with the given mean and standard deviation.
    pub fn gaussian(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.next_gaussian()
    }
}
