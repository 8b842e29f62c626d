//! Reproducible random streams.
//!
//! A [`StreamRng`] is a ChaCha8 keystream. The 256-bit key is expanded from
//! the 64-bit `seed` with SplitMix64; the 64-bit `stream` selects the ChaCha
//! stream (nonce). Both are fixed by the algorithm definitions, so an
//! identical `(seed, stream)` pair yields the same variates on every platform
//! and under every worker schedule.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 increment.
pub const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step on state `z`.
#[inline]
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream index for replication `rep` at sample size `n`: `n` in the high 32
/// bits, `rep` in the low 32 bits. Injective for `n, rep < 2^32`.
#[inline]
pub fn replication_stream(n: u64, rep: u64) -> u64 {
    debug_assert!(n < 1 << 32 && rep < 1 << 32);
    (n << 32) | (rep & 0xFFFF_FFFF)
}

#[derive(Debug, Clone)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            let word = splitmix64(state);
            state = state.wrapping_add(SPLITMIX_GAMMA);
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        StreamRng { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh generator on the same seed with a different stream.
    pub fn fork(&self, stream: u64) -> Self {
        StreamRng::new(self.seed, stream)
    }

    /// Uniform variate in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
