//! Deterministic, splittable randomness.
//!
//! Every random decision in a session is drawn from a ChaCha8 stream keyed by
//! `(master seed, domain, index)`. Per-tick substreams make the quantum stage
//! embarrassingly parallel without giving up reproducibility: the draw order
//! inside one tick is fixed, and ticks never share a stream, so the same
//! config produces the same results at any thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Keeping attack randomness in its own domain means an
/// attacked run and its baseline see identical channel noise.
pub mod domain {
    pub const TICK: u64 = 0x01;
    pub const ATTACK: u64 = 0x02;
    pub const QBER_SAMPLE: u64 = 0x03;
    pub const RECONCILE: u64 = 0x04;
    pub const PRIVACY: u64 = 0x05;
    pub const AUTH_POOL: u64 = 0x06;
}

/// SplitMix64 finalizer; full-period mixing of a 64-bit state.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the 64-bit seed for substream `(domain, index)` of `master`.
pub fn substream_seed(master: u64, domain: u64, index: u64) -> u64 {
    let a = splitmix64(master ^ splitmix64(domain));
    splitmix64(a ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// A ChaCha8 generator for substream `(domain, index)` of `master`.
pub fn substream(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, domain, index))
}
