//! One-time universal-hash authentication for the classical channel.
//!
//! Tags are 64-bit Wegman-Carter MACs. The message is split into 64-bit
//! words (with an appended length word), padded to a power of two, and
//! hashed down a binary tree. Each tree level reuses one fresh 64-bit key
//! `k` with the pair hash `h_k(a, b) = k·(k·a ⊕ b)` over `GF(2^64)` — a
//! degree-two polynomial in `k`, so any two distinct inputs collide (or
//! produce a chosen tag difference) for at most `2` of the `2^64` keys per
//! level. A final fresh 64-bit one-time mask is XORed onto the root.
//!
//! Key cost is therefore `64·⌈log2(words)⌉ + 64` bits per message — the
//! logarithmic Wegman-Carter consumption: doubling the message length costs
//! one more level, 64 more bits. Every key bit is consumed exactly once;
//! an exhausted pool is an authentication failure and aborts the session,
//! which is the security-correct behavior.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::messages::AuthTag;
use crate::protocol::{KeyBuffer, Stage};
use crate::Result;

/// Per-level key cost in bits.
pub const KEY_BITS_PER_LEVEL: u64 = 64;
/// Flat cost in bits (the one-time output mask).
pub const KEY_BITS_BASE: u64 = 64;
/// Tag length in bits.
pub const TAG_BITS: u32 = 64;

/// Reduction polynomial for GF(2^64): x^64 + x^4 + x^3 + x + 1.
const GF64_POLY: u64 = (1 << 4) | (1 << 3) | (1 << 1) | 1;

/// Carryless multiplication in GF(2^64).
fn gf64_mul(mut a: u64, mut b: u64) -> u64 {
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        let carry = a >> 63;
        a <<= 1;
        if carry == 1 {
            a ^= GF64_POLY;
        }
    }
    acc
}

/// Level hash: `k·(k·a ⊕ b)`.
fn pair_hash(key: u64, a: u64, b: u64) -> u64 {
    gf64_mul(key, gf64_mul(key, a) ^ b)
}

/// The shared pool of secret one-time authentication key bits. Both parties
/// start a session with identical pools and must consume bits in identical
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthKeyPool {
    bits: Vec<bool>,
    consumed: u64,
}

impl AuthKeyPool {
    pub fn new(bits: Vec<bool>) -> Self {
        AuthKeyPool { bits, consumed: 0 }
    }

    /// Draw a pool from a seeded generator (simulation stand-in for the
    /// pre-shared secret of a real deployment).
    pub fn from_rng<R: rand::Rng>(size_bits: usize, rng: &mut R) -> Self {
        AuthKeyPool::new((0..size_bits).map(|_| rng.gen()).collect())
    }

    pub fn size(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn remaining(&self) -> u64 {
        self.size() - self.consumed
    }

    /// Snapshot of the full pool contents (for offline transcript
    /// verification).
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    fn take_word(&mut self) -> Result<u64> {
        if self.remaining() < 64 {
            return Err(Error::PoolExhausted { needed: 64, available: self.remaining() });
        }
        let start = self.consumed as usize;
        let mut word = 0u64;
        for i in 0..64 {
            if self.bits[start + i] {
                word |= 1 << i;
            }
        }
        self.consumed += 64;
        Ok(word)
    }

    /// Append freshly generated key material (replenishment).
    fn extend(&mut self, bits: &[bool]) {
        self.bits.extend_from_slice(bits);
    }
}

/// Number of tree levels for a message of `len` bytes.
fn levels_for(len: usize) -> u32 {
    let words = len.div_ceil(8) + 1; // payload words plus the length word
    let padded = words.next_power_of_two().max(2);
    padded.trailing_zeros()
}

/// Key bits one tag consumes for a message of `len` bytes:
/// `64·levels + 64`.
pub fn key_bits_for_message(len: usize) -> u64 {
    KEY_BITS_PER_LEVEL * levels_for(len) as u64 + KEY_BITS_BASE
}

fn message_words(message: &[u8]) -> Vec<u64> {
    let mut words: Vec<u64> = message
        .chunks(8)
        .map(|chunk| {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            u64::from_le_bytes(buf)
        })
        .collect();
    words.push(message.len() as u64);
    let padded = words.len().next_power_of_two().max(2);
    words.resize(padded, 0);
    words
}

/// Compute the tag for a message, consuming fresh pool bits. Returns the
/// tag (carrying the pool offset it started at) and the number of key bits
/// used.
pub fn generate_tag(message: &[u8], pool: &mut AuthKeyPool) -> Result<(AuthTag, u64)> {
    let needed = key_bits_for_message(message.len());
    if pool.remaining() < needed {
        return Err(Error::PoolExhausted { needed, available: pool.remaining() });
    }
    let key_offset = pool.consumed();
    let mut words = message_words(message);
    while words.len() > 1 {
        let level_key = pool.take_word()?;
        words = words
            .chunks(2)
            .map(|pair| pair_hash(level_key, pair[0], pair[1]))
            .collect();
    }
    let mask = pool.take_word()?;
    let tag = AuthTag { key_offset, tag: words[0] ^ mask };
    debug_assert_eq!(pool.consumed() - key_offset, needed);
    Ok((tag, needed))
}

/// Verify a tag, consuming the same pool bits the generator used. A tag
/// whose `key_offset` disagrees with this pool's consumption is a hard
/// desynchronization error — the one-time key discipline was broken.
pub fn verify_tag(message: &[u8], tag: &AuthTag, pool: &mut AuthKeyPool) -> Result<bool> {
    if tag.key_offset != pool.consumed() {
        return Err(Error::PoolDesync { expected: pool.consumed(), actual: tag.key_offset });
    }
    let (recomputed, _) = generate_tag(message, pool)?;
    Ok(recomputed.tag == tag.tag)
}

/// Outcome of replenishing the pool from a final key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplenishOutcome {
    /// The key delivered to the application, minus the donated bits.
    pub delivered_key: KeyBuffer,
    /// Bits moved into the pool.
    pub donated_bits: u64,
    /// False when the final key was too short to donate the requested
    /// quantum; the session still yields key but flags the shortfall.
    pub replenished: bool,
}

/// Move the first `quantum` bits of the final key into the pool so the next
/// session can authenticate with freshly generated material.
pub fn replenish(pool: &mut AuthKeyPool, final_key: &KeyBuffer, quantum: usize) -> Result<ReplenishOutcome> {
    if quantum == 0 {
        let mut delivered = final_key.clone();
        delivered.advance_to(Stage::Final)?;
        return Ok(ReplenishOutcome { delivered_key: delivered, donated_bits: 0, replenished: true });
    }
    if final_key.len() < quantum {
        let mut delivered = final_key.clone();
        delivered.advance_to(Stage::Final)?;
        return Ok(ReplenishOutcome { delivered_key: delivered, donated_bits: 0, replenished: false });
    }
    let donated: Vec<bool> = final_key.bits()[..quantum].to_vec();
    pool.extend(&donated);
    let remaining = final_key.bits()[quantum..].to_vec();
    let delivered = final_key.derive(Stage::Final, remaining)?;
    Ok(ReplenishOutcome { delivered_key: delivered, donated_bits: quantum as u64, replenished: true })
}
