//! Deterministic per-replication random streams.
//!
//! Every replication `i` of a run seeded with `seed` draws from the ChaCha20
//! keystream keyed by `seed` with stream id `i`. The generator is
//! counter-based, so the values a replication sees do not depend on which
//! thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
