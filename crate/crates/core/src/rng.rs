//! Deterministic random streams.
//!
//! Every random draw in the pipeline comes from a ChaCha8 generator keyed by
//! `(seed, stream, step, index)`. Particle `i` at iteration `k` always sees the
//! same numbers no matter how many workers evaluate the population or in which
//! order they run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag mixed into the stream key so unrelated consumers never share
/// a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Init = 1,
    Resample = 2,
    Motion = 3,
    FrameNoise = 4,
    BackgroundNoise = 5,
    Bench = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self, stream: Stream, step: u64, index: u64) -> ChaCha8Rng {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        // Absorb each component, then squeeze four words for the key.
        for word in [stream as u64, step, index] {
            state = splitmix64(state ^ splitmix64(word));
        }
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
