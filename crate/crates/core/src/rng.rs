//! Seeded random streams and deterministic parallel partitioning.
//!
//! Every Monte Carlo loop in the crate is split into fixed-size chunks, each
//! driven by its own ChaCha stream. The chunking depends only on the sample
//! count, never on the worker count, so results are reproducible for a fixed
//! seed whatever the size of the rayon pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The generator used for all simulation work.
pub type SimRng = ChaCha8Rng;

/// Samples per parallel chunk.
pub const CHUNK: usize = 2048;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A generator seeded from `seed`.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent substream `index` of the stream family identified by `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(splitmix64(seed));
    rng.set_stream(index);
    rng
}

/// Draws a fresh family seed from a caller-supplied generator.
pub fn fork_seed<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.random()
}

/// Runs `body` over `total` samples split into [`CHUNK`]-sized pieces, in
/// parallel, returning the per-chunk results in chunk order.
pub fn par_chunks<A, F>(seed: u64, total: usize, body: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut SimRng, usize) -> A + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(total - c * CHUNK);
            let mut rng = substream(seed, c as u64);
            body(&mut rng, len)
        })
        .collect()
}
