//! Deterministic, key-derived random streams.
//!
//! Every stochastic draw in the simulator comes from a [`SimRng`] stream
//! derived from the run seed plus a small tuple of context words (for
//! example drop index, transmitter id, receiver id). The derivation is a
//! pure function, so the value sampled for a given link in a given drop
//! never depends on evaluation order or on how work is split across
//! threads. That property is what makes reruns byte-identical regardless
//! of the `--jobs` setting.

use rand::RngCore;

/// Weyl increment used by the splitmix64 generator.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain separator so stream families cannot collide with each other.
const STREAM_DOMAIN: u64 = 0x6A09_E667_F3BC_C909;

/// splitmix64 finalizer: a bijective 64-bit mixer with full avalanche.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A small, fast generator (splitmix64) whose state is derived from a seed
/// and a context key. Intended for short per-link streams: construction is
/// a handful of multiplies, and distinct keys yield independent sequences.
#[derive(Debug, Clone)]
pub struct SimRng {
    state: u64,
}

impl SimRng {
    /// Derives the stream for `(seed, context...)`. The same inputs always
    /// produce the same sequence; changing any word produces an unrelated
    /// one.
    pub fn from_key(seed: u64, context: &[u64]) -> Self {
        let mut state = mix64(seed ^ STREAM_DOMAIN);
        for &word in context {
            state = mix64(state.wrapping_add(GOLDEN_GAMMA) ^ word);
        }
        SimRng { state }
    }
}

impl RngCore for SimRng {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let word = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
