//! Seeded random streams.
//!
//! Every replicate of every experiment cell owns a private ChaCha20 stream.
//! The stream for `(master, cell, replicate)` is derived as follows:
//!
//! 1. the 256-bit ChaCha key is `ChaCha20Rng::seed_from_u64(master)`, i.e. the
//!    master seed expanded with the PCG32 filler from `rand_core`;
//! 2. the 64-bit ChaCha stream id is `(cell << 32) | replicate`.
//!
//! Distinct `(cell, replicate)` pairs therefore select disjoint ChaCha streams
//! under one key, and the mapping does not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub fn replicate_rng(master: u64, cell: u32, replicate: u32) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream((u64::from(cell) << 32) | u64::from(replicate));
    rng
}

/// Stream `(0, 0)` for a single seed.
pub fn seeded_rng(seed: u64) -> StreamRng {
    replicate_rng(seed, 0, 0)
}
