//! Seeded generators with named substreams.
//!
//! A stream is `(seed, name, index)`. The seed keys a ChaCha8 generator and
//! the name/index pair selects its 64-bit stream, so substreams never overlap
//! and results do not depend on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Identifies one substream.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StreamId {
    pub seed: u64,
    pub name: String,
    pub index: u64,
}

impl StreamId {
    pub fn new(seed: u64, name: impl Into<String>, index: u64) -> Self {
        StreamId { seed, name: name.into(), index }
    }

    /// Substream `index` under the same seed and name.
    pub fn child(&self, index: u64) -> Self {
        StreamId { seed: self.seed, name: self.name.clone(), index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        stream(self.seed, &self.name, self.index)
    }
}

impl std::fmt::Display for StreamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.name, self.index)
    }
}

fn fnv1a64(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// The generator for substream `(name, index)` of `seed`.
pub fn stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(name) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng
}
