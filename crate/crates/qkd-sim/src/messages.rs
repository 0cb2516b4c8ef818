//! Classical-channel message schema.
//!
//! Every public-discussion message in a session is one of these bodies,
//! wrapped in an authenticated envelope. The schema is versioned and has a
//! canonical byte encoding (little-endian, length-prefixed) that
//! authentication tags are computed over, so transcript dumps are
//! byte-stable regardless of the serialization used for display.

use serde::{Deserialize, Serialize};

use crate::photonics::Party;

/// Version of the message schema and canonical encoding.
pub const SCHEMA_VERSION: u16 = 1;

/// Row/column parities Alice discloses for one block in one pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockParities {
    pub block_id: u32,
    pub row_parities: Vec<bool>,
    pub col_parities: Vec<bool>,
}

impl BlockParities {
    pub fn bit_count(&self) -> u64 {
        (self.row_parities.len() + self.col_parities.len()) as u64
    }
}

/// One disclosed QBER-sample bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBit {
    pub tick: u64,
    pub bit: bool,
}

/// The payload of a classical message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessageBody {
    /// Bob's detected tick indices (never the bit values).
    IndexList { ticks: Vec<u64> },
    /// Disclosed sample bits for error-rate estimation.
    QberSample { samples: Vec<SampleBit> },
    /// All row and column parities for one reconciliation pass.
    Parity { pass: u32, blocks: Vec<BlockParities> },
    /// Seed and target length for subset-parity privacy amplification.
    PaSeed { seed: u64, target_length: u64 },
}

impl MessageBody {
    /// Key-material bits this message disclosed over the public channel.
    pub fn disclosed_bits(&self) -> u64 {
        match self {
            MessageBody::IndexList { .. } => 0,
            MessageBody::QberSample { samples } => samples.len() as u64,
            MessageBody::Parity { blocks, .. } => blocks.iter().map(BlockParities::bit_count).sum(),
            MessageBody::PaSeed { .. } => 0,
        }
    }
}

/// One-time authentication tag attached to a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthTag {
    /// Pool offset the tag's key material starts at; lets the verifier
    /// detect pool desynchronization before checking the tag.
    pub key_offset: u64,
    pub tag: u64,
}

/// An authenticated classical message as it appears in a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptMessage {
    pub id: u64,
    pub sender: Party,
    pub body: MessageBody,
    pub tag: AuthTag,
}

fn push_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_bits(buf: &mut Vec<u8>, bits: &[bool]) {
    push_u64(buf, bits.len() as u64);
    let mut byte = 0u8;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            byte |= 1 << (i % 8);
        }
        if i % 8 == 7 {
            buf.push(byte);
            byte = 0;
        }
    }
    if bits.len() % 8 != 0 {
        buf.push(byte);
    }
}

/// Canonical bytes the authentication tag is computed over: schema version,
/// message id, sender and the full payload.
pub fn canonical_bytes(id: u64, sender: Party, body: &MessageBody) -> Vec<u8> {
    let mut buf = Vec::new();
    push_u16(&mut buf, SCHEMA_VERSION);
    push_u64(&mut buf, id);
    buf.push(match sender {
        Party::Alice => 0,
        Party::Bob => 1,
    });
    match body {
        MessageBody::IndexList { ticks } => {
            buf.push(0);
            push_u64(&mut buf, ticks.len() as u64);
            for &t in ticks {
                push_u64(&mut buf, t);
            }
        }
        MessageBody::QberSample { samples } => {
            buf.push(1);
            push_u64(&mut buf, samples.len() as u64);
            for s in samples {
                push_u64(&mut buf, s.tick);
                buf.push(u8::from(s.bit));
            }
        }
        MessageBody::Parity { pass, blocks } => {
            buf.push(2);
            push_u32(&mut buf, *pass);
            push_u64(&mut buf, blocks.len() as u64);
            for b in blocks {
                push_u32(&mut buf, b.block_id);
                push_bits(&mut buf, &b.row_parities);
                push_bits(&mut buf, &b.col_parities);
            }
        }
        MessageBody::PaSeed { seed, target_length } => {
            buf.push(3);
            push_u64(&mut buf, *seed);
            push_u64(&mut buf, *target_length);
        }
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_encoding_is_stable_and_injective_on_fields() {
        let a = canonical_bytes(1, Party::Bob, &MessageBody::IndexList { ticks: vec![3, 5] });
        let b = canonical_bytes(1, Party::Bob, &MessageBody::IndexList { ticks: vec![3, 5] });
        assert_eq!(a, b);

        let c = canonical_bytes(2, Party::Bob, &MessageBody::IndexList { ticks: vec![3, 5] });
        assert_ne!(a, c);
        let d = canonical_bytes(1, Party::Alice, &MessageBody::IndexList { ticks: vec![3, 5] });
        assert_ne!(a, d);
        let e = canonical_bytes(1, Party::Bob, &MessageBody::IndexList { ticks: vec![3, 6] });
        assert_ne!(a, e);
    }

    #[test]
    fn disclosed_bits_counts_payload_key_material() {
        assert_eq!(MessageBody::IndexList { ticks: vec![1, 2, 3] }.disclosed_bits(), 0);
        let sample = MessageBody::QberSample {
            samples: vec![SampleBit { tick: 0, bit: true }, SampleBit { tick: 4, bit: false }],
        };
        assert_eq!(sample.disclosed_bits(), 2);
        let parity = MessageBody::Parity {
            pass: 0,
            blocks: vec![BlockParities {
                block_id: 0,
                row_parities: vec![true; 16],
                col_parities: vec![false; 16],
            }],
        };
        assert_eq!(parity.disclosed_bits(), 32);
        assert_eq!(MessageBody::PaSeed { seed: 1, target_length: 10 }.disclosed_bits(), 0);
    }

    #[test]
    fn bit_packing_round_trips_through_length() {
        let mut buf = Vec::new();
        push_bits(&mut buf, &[true, false, true, true, false, false, false, true, true]);
        // 8 bytes length + 2 payload bytes.
        assert_eq!(buf.len(), 10);
        assert_eq!(&buf[0..8], &9u64.to_le_bytes());
        assert_eq!(buf[8], 0b1000_1101);
        assert_eq!(buf[9], 0b0000_0001);
    }
}
