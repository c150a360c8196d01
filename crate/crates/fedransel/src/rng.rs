//! Deterministic RNG streams derived from one run seed.
//!
//! Every consumer gets its own ChaCha stream, so nodes can train in parallel
//! (or not) without changing any draw, and protocol sampling never perturbs
//! training shuffles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags; per-node streams add the node id to the base.
pub mod stream {
    pub const DATA: u64 = 0x0100_0000;
    pub const SERVER: u64 = 0x0200_0000;
    pub const INFERENCE: u64 = 0x0300_0000;
    pub const MODEL_INIT: u64 = 0x1000_0000;
    pub const NODE_TRAIN: u64 = 0x2000_0000;
    pub const NODE_SHARE: u64 = 0x3000_0000;
    pub const NODE_POISON: u64 = 0x4000_0000;
    pub const NODE_FLIP: u64 = 0x5000_0000;
}

/// Independent stream `tag` of the generator keyed by `seed`.
pub fn substream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}
