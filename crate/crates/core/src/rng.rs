//! Deterministic random streams.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the 256-bit seed
//! `[master, purpose, a, b]` (four little-endian `u64` words). ChaCha is a
//! counter-based generator, so the output depends only on the key and not on
//! the platform, the thread that consumes it, or on other streams. Jobs that
//! run concurrently (coalitions, replications) each own a stream keyed by
//! their position, which keeps parallel runs bit-identical to sequential ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream purposes; the second key word.
pub mod purpose {
    pub const JOINT_SAMPLE: u64 = 1;
    pub const COALITION: u64 = 2;
    pub const SUBSAMPLE: u64 = 3;
    pub const REPLICATION: u64 = 4;
    pub const DATASET: u64 = 5;
}

pub fn stream(master: u64, purpose: u64, a: u64, b: u64) -> StreamRng {
    let mut key = [0u8; 32];
    for (k, word) in [master, purpose, a, b].into_iter().enumerate() {
        key[8 * k..8 * k + 8].copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// The master seed of replication `r` derived from a run's master seed.
pub fn replication_seed(master: u64, r: u64) -> u64 {
    use rand::RngCore;
    stream(master, purpose::REPLICATION, r, 0).next_u64()
}
