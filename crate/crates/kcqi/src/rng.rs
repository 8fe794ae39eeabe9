//! Seeded substream derivation.
//!
//! Every stochastic component takes its own ChaCha stream derived from a
//! master seed plus a role tag and index words. Streams for distinct tuples
//! are independent, so work items can run in any order (or in parallel)
//! without changing their output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Role tags keeping unrelated substreams disjoint.
pub mod tag {
    /// One CQI-vector generation, indexed by (k, snr index, repetition).
    pub const SAMPLE: u64 = 0x01;
    /// Train/test split of a generated dataset.
    pub const SPLIT: u64 = 0x02;
    /// Validation carve inside a training run.
    pub const VALIDATION: u64 = 0x03;
    /// Classifier weight initialization.
    pub const INIT: u64 = 0x04;
    /// Autoencoder weight initialization.
    pub const AUTOENCODER: u64 = 0x05;
}

/// Derives a deterministic substream from a master seed and three index words.
///
/// The four words are written verbatim into the 32-byte ChaCha seed, so
/// distinct tuples can never collide.
pub fn substream(master_seed: u64, words: [u64; 3]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&words[0].to_le_bytes());
    seed[16..24].copy_from_slice(&words[1].to_le_bytes());
    seed[24..32].copy_from_slice(&words[2].to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}
