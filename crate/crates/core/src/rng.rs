//! Seeded random streams.
//!
//! A stream is addressed by `(master seed, key, index)`. The key (usually a
//! rally id) and the master seed are hashed into a ChaCha8 key and the index
//! selects the ChaCha stream, so every stream is reproducible on its own and
//! independent of evaluation order. Reusing the same address across coalition
//! evaluations gives common random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn stream_rng(master_seed: u64, key: &str, index: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update((key.len() as u64).to_le_bytes());
    hasher.update(key.as_bytes());
    let seed: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(index);
    rng
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
