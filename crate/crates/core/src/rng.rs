//! Deterministic random-stream derivation.
//!
//! Every simulation cell (one repetition of one sweep point) owns a private
//! ChaCha8 stream derived from `(master seed, nominal rate, repetition)`.
//! Streams are independent of execution order, so parallel sweeps reproduce
//! the sequential result bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; mixes a 64-bit value into a well-distributed one.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id for the cell at `(rate, repetition)`.
///
/// The rate enters through its bit pattern so that any finite f64 grid value
/// maps to a stable id.
pub fn cell_stream(rate_bits: u64, repetition: u64) -> u64 {
    mix64(mix64(rate_bits) ^ repetition.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// RNG for one simulation cell.
pub fn cell_rng(master_seed: u64, rate_per_min: f64, repetition: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(cell_stream(rate_per_min.to_bits(), u64::from(repetition)));
    rng
}
