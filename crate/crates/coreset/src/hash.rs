//! Seeded 64-bit mixing hash shared by the sketches and the streaming pass.

/// splitmix64 finalizer; good avalanche, cheap, deterministic across runs.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seeded hash of a key.
#[inline]
pub fn hash_key(seed: u64, key: u64) -> u64 {
    mix64(seed ^ mix64(key))
}

/// Uniform f64 in [0, 1) derived from a seeded hash.
#[inline]
pub fn hash_unit(seed: u64, key: u64) -> f64 {
    (hash_key(seed, key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
