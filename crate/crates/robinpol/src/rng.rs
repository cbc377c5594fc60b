//! Deterministic 64-bit generator used for reproducible campaigns.
//!
//! The generator is SplitMix64 (Vigna's public-domain mixer): state advances
//! by the golden-ratio increment 0x9E3779B97F4A7C15 and each output is the
//! finalized mix of the new state. It is trivially portable, which keeps
//! experiment streams reproducible from the seed alone in any language.
//! Statistical quality is more than enough for sampling block positions,
//! heights, and reflection centers.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with the standard 53-bit mantissa construction.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Uses plain modulo reduction; the bias is
    /// below 2^-32 for every n we draw (n never exceeds a few thousand) and
    /// keeping the reduction this simple makes the stream easy to replicate.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below needs n > 0");
        self.next_u64() % n
    }
}
