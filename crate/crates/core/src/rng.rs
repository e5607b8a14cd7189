//! Keyed random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose key is
//! expanded from the run seed and whose 64-bit stream id is a hash of a
//! label tuple (edge coordinates, resample epoch, replica index, ...).
//! Results therefore never depend on the order in which streams are opened.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator recorded in run metadata.
pub const RNG_NAME: &str =
    "ChaCha8 (rand_chacha 0.9); key = SplitMix64 expansion of seed; stream = SplitMix64 fold of labels";

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a label tuple.
#[inline]
pub fn fold(labels: impl IntoIterator<Item = u64>) -> u64 {
    labels
        .into_iter()
        .fold(0x243f_6a88_85a3_08d3, |h, x| mix64(h ^ mix64(x)))
}

/// Domain tags so that streams for different purposes never collide.
pub mod tag {
    pub const EDGE: u64 = 1;
    pub const DRIVER: u64 = 2;
    pub const REPLICA: u64 = 3;
    pub const REGENERATION: u64 = 4;
    pub const TRANSPOSITIONS: u64 = 5;
    pub const GEM: u64 = 6;
    pub const RESAMPLE: u64 = 7;
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = mix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Opens the stream identified by `(seed, labels)`.
pub fn stream(seed: u64, labels: impl IntoIterator<Item = u64>) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
    rng.set_stream(fold(labels));
    rng
}

/// Derives a child seed, e.g. for a fresh clock store after a regeneration.
pub fn derive_seed(seed: u64, labels: impl IntoIterator<Item = u64>) -> u64 {
    mix64(seed ^ fold(labels))
}
