// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reproducible random streams.
//!
//! Every random draw in the crate comes from ChaCha8 (RFC 7539 block function
//! reduced to 8 rounds). A stream is identified by a 64-bit seed and a 64-bit
//! stream id: the seed fills the first eight key bytes (little endian, the
//! remaining 24 key bytes are zero) and the stream id selects the ChaCha nonce.
//! Hierarchical seeds (cell, replication, segment, ...) are folded with
//! SplitMix64 so that a stream never depends on the order in which sibling
//! streams were consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of tags into `base`, yielding a child seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(base), |acc, &tag| splitmix64(acc ^ splitmix64(tag)))
}

/// The ChaCha8 stream `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}
