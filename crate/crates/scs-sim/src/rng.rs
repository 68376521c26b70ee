//! Deterministic per-entity random streams.
//!
//! Every cluster, image, and Monte Carlo batch gets its own ChaCha8 stream
//! derived from (master seed, entity label). Streams are independent of
//! execution order, so parallel and sequential runs produce identical output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; stable across platforms.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stable 64-bit hash of a byte string (FNV-1a folded through splitmix64).
pub fn hash_label(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix(h)
}

/// Derive an independent stream from a master seed and a textual label.
pub fn stream(master_seed: u64, label: &str) -> ChaCha8Rng {
    seeded(mix(master_seed) ^ hash_label(label))
}

/// Derive an independent stream from a master seed and a numeric index.
pub fn indexed_stream(master_seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    seeded(mix(master_seed) ^ hash_label(domain) ^ mix(index.wrapping_add(1)))
}

fn seeded(word: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&mix(word.wrapping_add(i as u64)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
