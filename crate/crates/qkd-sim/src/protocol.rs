//! Alice and Bob as clocked state machines: pulse emission, measurement,
//! sifting and error-rate estimation.
//!
//! Sifting keeps exactly the ticks where one detector clicked; Bob's key bit
//! is the clicking detector's value and Alice's is her bit at that tick.
//! Dual fires are excluded from the key and counted separately — they are
//! the multi-photon monitor, not key material. In a noiseless, attack-free
//! run the sifted keys agree exactly (B92 has no false positives) and the
//! yield converges to 1/4 of the transmitted pulses.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{measure_b92, ChannelParams, DetectionRecord, Outcome};
use crate::channel::ArrivalEvent;
use crate::error::Error;
use crate::photonics::{encode_b92, Basis, Party, PulseEvent, PulseSource};
use crate::Result;

/// Pipeline stage of a key buffer. Transitions are forward-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Raw,
    Sifted,
    Reconciled,
    Amplified,
    Final,
}

/// An indexed bit sequence with a stage tag and a ledger of publicly
/// disclosed bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyBuffer {
    bits: Vec<bool>,
    ticks: Vec<u64>,
    stage: Stage,
    leaked_bits: u64,
}

impl KeyBuffer {
    /// Build a buffer from tick-aligned bits. Tick indices must be strictly
    /// increasing.
    pub fn new(stage: Stage, bits: Vec<bool>, ticks: Vec<u64>) -> Result<Self> {
        if bits.len() != ticks.len() {
            return Err(Error::LengthMismatch {
                context: "key buffer bits vs ticks",
                left: bits.len(),
                right: ticks.len(),
            });
        }
        if ticks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Protocol("tick indices must be strictly increasing".into()));
        }
        Ok(KeyBuffer { bits, ticks, stage, leaked_bits: 0 })
    }

    /// A raw buffer indexed 0..n.
    pub fn raw(bits: Vec<bool>) -> Self {
        let ticks = (0..bits.len() as u64).collect();
        KeyBuffer { bits, ticks, stage: Stage::Raw, leaked_bits: 0 }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn ticks(&self) -> &[u64] {
        &self.ticks
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn leaked_bits(&self) -> u64 {
        self.leaked_bits
    }

    /// Record `n` more publicly disclosed bits. The ledger only grows.
    pub fn note_leak(&mut self, n: u64) {
        self.leaked_bits += n;
    }

    /// Move the buffer forward in the pipeline. Backward transitions error.
    pub fn advance_to(&mut self, stage: Stage) -> Result<()> {
        if stage < self.stage {
            return Err(Error::StageRegression { from: self.stage, to: stage });
        }
        self.stage = stage;
        Ok(())
    }

    /// Remove the bits at the given positions (ascending, deduplicated),
    /// returning the removed bits in position order.
    pub fn remove_positions(&mut self, positions: &[usize]) -> Vec<bool> {
        let mut removed = Vec::with_capacity(positions.len());
        let mut keep_bits = Vec::with_capacity(self.bits.len() - positions.len());
        let mut keep_ticks = Vec::with_capacity(self.ticks.len() - positions.len());
        let mut cursor = 0usize;
        for (i, (&bit, &tick)) in self.bits.iter().zip(self.ticks.iter()).enumerate() {
            if cursor < positions.len() && positions[cursor] == i {
                removed.push(bit);
                cursor += 1;
            } else {
                keep_bits.push(bit);
                keep_ticks.push(tick);
            }
        }
        self.bits = keep_bits;
        self.ticks = keep_ticks;
        removed
    }

    /// Replace the bit values, keeping ticks, stage and ledger. Lengths must
    /// match; used by error correction which flips bits in place.
    pub fn replace_bits(&mut self, bits: Vec<bool>) -> Result<()> {
        if bits.len() != self.bits.len() {
            return Err(Error::LengthMismatch {
                context: "replace_bits",
                left: bits.len(),
                right: self.bits.len(),
            });
        }
        self.bits = bits;
        Ok(())
    }

    /// Rebuild the buffer with new contents at a new stage, carrying the
    /// leakage ledger forward (used after privacy amplification, where tick
    /// alignment no longer exists).
    pub fn derive(&self, stage: Stage, bits: Vec<bool>) -> Result<Self> {
        if stage < self.stage {
            return Err(Error::StageRegression { from: self.stage, to: stage });
        }
        let ticks = (0..bits.len() as u64).collect();
        Ok(KeyBuffer { bits, ticks, stage, leaked_bits: self.leaked_bits })
    }
}

/// Output of sifting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiftResult {
    pub alice_key: KeyBuffer,
    pub bob_key: KeyBuffer,
    /// Ticks Bob published as detections (single clicks only).
    pub detected_indices: Vec<u64>,
    /// Dual fires observed during the run; excluded from the keys.
    pub dual_fire_count: u64,
}

/// Alice's half of one clock tick: encode her bit and emit a pulse.
pub fn alice_round<R: Rng>(bit: bool, source: &PulseSource, tick_index: u64, rng: &mut R) -> PulseEvent {
    PulseEvent {
        tick_index,
        photon_count: source.sample_photon_count(rng),
        polarization: encode_b92(bit, Party::Alice),
    }
}

/// Bob's half of one clock tick: measure the arrival with the analyzer his
/// bit selects. In beamsplitter mode the caller draws `bob_bit` uniformly
/// per tick, mirroring the 50/50 optical splitter that implements Bob's
/// random choice.
pub fn bob_round<R: Rng>(
    arrival: &ArrivalEvent,
    bob_bit: bool,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<DetectionRecord> {
    measure_b92(arrival, bob_bit, params, rng)
}

/// B92 sifting: keep exactly the ticks whose outcome is a single click.
/// A pure function of its inputs.
pub fn sift(
    alice_bits: &[bool],
    bob_bits: &[bool],
    detections: &[DetectionRecord],
) -> Result<SiftResult> {
    if alice_bits.len() != detections.len() {
        return Err(Error::LengthMismatch {
            context: "sift alice bits vs detections",
            left: alice_bits.len(),
            right: detections.len(),
        });
    }
    if bob_bits.len() != detections.len() {
        return Err(Error::LengthMismatch {
            context: "sift bob bits vs detections",
            left: bob_bits.len(),
            right: detections.len(),
        });
    }
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    let mut ticks = Vec::new();
    let mut duals = 0u64;
    for (i, record) in detections.iter().enumerate() {
        match record.outcome {
            Outcome::Bit0 | Outcome::Bit1 => {
                alice.push(alice_bits[i]);
                bob.push(record.outcome.bit().expect("single click has a bit"));
                ticks.push(record.tick_index);
            }
            Outcome::Dual => duals += 1,
            Outcome::NoClick => {}
        }
    }
    Ok(SiftResult {
        alice_key: KeyBuffer::new(Stage::Sifted, alice, ticks.clone())?,
        bob_key: KeyBuffer::new(Stage::Sifted, bob, ticks.clone())?,
        detected_indices: ticks,
        dual_fire_count: duals,
    })
}

/// BB84 sifting: keep detected ticks where preparation and measurement
/// bases match. Ideal yield is half of the detected photons.
pub fn sift_bb84(
    alice_bits: &[bool],
    alice_bases: &[Basis],
    bob_bases: &[Basis],
    detections: &[DetectionRecord],
) -> Result<SiftResult> {
    let n = detections.len();
    for (context, len) in [
        ("sift_bb84 alice bits", alice_bits.len()),
        ("sift_bb84 alice bases", alice_bases.len()),
        ("sift_bb84 bob bases", bob_bases.len()),
    ] {
        if len != n {
            return Err(Error::LengthMismatch { context, left: len, right: n });
        }
    }
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    let mut ticks = Vec::new();
    let mut duals = 0u64;
    for (i, record) in detections.iter().enumerate() {
        match record.outcome {
            Outcome::Bit0 | Outcome::Bit1 => {
                if alice_bases[i] == bob_bases[i] {
                    alice.push(alice_bits[i]);
                    bob.push(record.outcome.bit().expect("single click has a bit"));
                    ticks.push(record.tick_index);
                }
            }
            Outcome::Dual => duals += 1,
            Outcome::NoClick => {}
        }
    }
    Ok(SiftResult {
        alice_key: KeyBuffer::new(Stage::Sifted, alice, ticks.clone())?,
        bob_key: KeyBuffer::new(Stage::Sifted, bob, ticks.clone())?,
        detected_indices: ticks,
        dual_fire_count: duals,
    })
}

/// Result of a disclosed-sample error-rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QberEstimate {
    pub qber: f64,
    /// Bits each party disclosed (and removed from its key).
    pub disclosed: u64,
    /// Mismatches observed in the sample.
    pub errors: u64,
}

/// Sampled positions and the bits both parties disclosed for them; the
/// session turns these into `QBER_SAMPLE` messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QberSampleExchange {
    pub ticks: Vec<u64>,
    pub alice_bits: Vec<bool>,
    pub bob_bits: Vec<bool>,
}

/// Estimate the QBER by disclosing a random sample of the sifted keys.
///
/// The sampled positions are chosen by the shared rng, compared, counted
/// and then removed from both keys; each key's leakage ledger grows by the
/// sample size. `sample_fraction` must be in `(0, 1]`; sampling an empty
/// key is a protocol error.
pub fn estimate_qber<R: Rng>(
    alice_key: &mut KeyBuffer,
    bob_key: &mut KeyBuffer,
    sample_fraction: f64,
    rng: &mut R,
) -> Result<(QberEstimate, QberSampleExchange)> {
    if alice_key.is_empty() || bob_key.is_empty() {
        return Err(Error::Protocol("cannot estimate QBER on empty keys".into()));
    }
    if alice_key.len() != bob_key.len() {
        return Err(Error::LengthMismatch {
            context: "estimate_qber keys",
            left: alice_key.len(),
            right: bob_key.len(),
        });
    }
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(Error::parameter(
            "sample_fraction",
            format!("must be in (0, 1], got {sample_fraction}"),
        ));
    }
    let n = alice_key.len();
    let sample_size = ((n as f64 * sample_fraction).round() as usize).clamp(1, n);
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(rng);
    positions.truncate(sample_size);
    positions.sort_unstable();

    let ticks: Vec<u64> = positions.iter().map(|&p| alice_key.ticks()[p]).collect();
    let alice_sample = alice_key.remove_positions(&positions);
    let bob_sample = bob_key.remove_positions(&positions);
    alice_key.note_leak(sample_size as u64);
    bob_key.note_leak(sample_size as u64);

    let errors = alice_sample
        .iter()
        .zip(bob_sample.iter())
        .filter(|(a, b)| a != b)
        .count() as u64;
    let estimate = QberEstimate {
        qber: errors as f64 / sample_size as f64,
        disclosed: sample_size as u64,
        errors,
    };
    Ok((estimate, QberSampleExchange { ticks, alice_bits: alice_sample, bob_bits: bob_sample }))
}
