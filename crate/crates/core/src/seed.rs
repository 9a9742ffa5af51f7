//! Stable seed derivation. Every random stream in the simulator is a
//! ChaCha8 generator keyed by a 64-bit value mixed from a master seed and a
//! stream identifier, so streams are reproducible across runs, platforms and
//! worker counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a stream id (episode id, reset seed, ...).
pub fn mix_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ stream.rotate_left(32) ^ 0x6361_7669_6172_0001)
}

pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(master, stream))
}
