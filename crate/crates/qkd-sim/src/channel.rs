//! The lossy, noisy free-space quantum channel and Bob's gated detector
//! pair.
//!
//! Loss is modeled as independent photon survival (binomial thinning), so
//! transmitting at `η_T` and then detecting at `η_D` is distributionally the
//! same as a single thinning at `η_T·η_D`. The atmosphere is treated as
//! non-birefringent: polarization is never rotated in flight.
//!
//! Bob's receiver has two single-photon detectors. For B92, the analyzer
//! selected by Bob's bit feeds the "pass" detector; photons the analyzer
//! rejects can only reach the opposite detector by leaking through the
//! orthogonal port, with probability [`ChannelParams::analyzer_extinction`]
//! (a polarizing-element imperfection, zero for ideal optics). That leak is
//! what makes dual fires possible on multi-photon pulses while keeping their
//! rate pinned well below the key rate. Background and dark counts arrive
//! per gate, split evenly between the two detectors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::photonics::{encode_b92, encode_bb84, pass_probability, Basis, Party, PolarizationState, PulseEvent};
use crate::Result;

/// Physical parameters of the channel and receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Combined path transmission probability per photon.
    pub transmittance: f64,
    /// Detector quantum efficiency per arriving photon.
    pub detector_efficiency: f64,
    /// Background photon rate at the receiver, in Hz.
    pub background_rate_hz: f64,
    /// Detector dark count rate, in Hz.
    pub dark_rate_hz: f64,
    /// Gate (timing window) length in seconds.
    pub gate_window_s: f64,
    /// Detector gate rate in Hz (one gate per transmitted pulse).
    pub trigger_rate_hz: f64,
    /// Probability that an analyzer-rejected photon leaks out of the
    /// orthogonal port toward the opposite detector. Zero for ideal
    /// polarizing elements.
    pub analyzer_extinction: f64,
}

impl ChannelParams {
    /// Validate all fields; call after building one by hand.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("transmittance", self.transmittance),
            ("detector_efficiency", self.detector_efficiency),
            ("analyzer_extinction", self.analyzer_extinction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::parameter(name, format!("must be in [0,1], got {value}")));
            }
        }
        for (name, value) in [
            ("background_rate_hz", self.background_rate_hz),
            ("dark_rate_hz", self.dark_rate_hz),
        ] {
            if !(value >= 0.0) {
                return Err(Error::parameter(name, format!("must be >= 0, got {value}")));
            }
        }
        if !(self.gate_window_s > 0.0) {
            return Err(Error::parameter(
                "gate_window_s",
                format!("must be > 0, got {}", self.gate_window_s),
            ));
        }
        if !(self.trigger_rate_hz > 0.0) {
            return Err(Error::parameter(
                "trigger_rate_hz",
                format!("must be > 0, got {}", self.trigger_rate_hz),
            ));
        }
        noise_click_probability(self)?;
        Ok(())
    }

    /// A lossless, noiseless, ideal-optics channel.
    pub fn ideal() -> Self {
        ChannelParams {
            transmittance: 1.0,
            detector_efficiency: 1.0,
            background_rate_hz: 0.0,
            dark_rate_hz: 0.0,
            gate_window_s: 1e-9,
            trigger_rate_hz: 1e6,
            analyzer_extinction: 0.0,
        }
    }
}

/// A pulse after propagation, at the receiver input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalEvent {
    pub tick_index: u64,
    pub surviving_photons: u32,
    pub polarization: PolarizationState,
}

/// What Bob's detector pair reported for one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Neither detector clicked.
    NoClick,
    /// Only the bit-0 detector clicked.
    Bit0,
    /// Only the bit-1 detector clicked.
    Bit1,
    /// Both detectors clicked in the same gate.
    Dual,
}

impl Outcome {
    /// The key bit this outcome encodes, if it is a single click.
    pub fn bit(&self) -> Option<bool> {
        match self {
            Outcome::Bit0 => Some(false),
            Outcome::Bit1 => Some(true),
            _ => None,
        }
    }

}

/// Physical origin of the clicks behind an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    Signal,
    Background,
    Dark,
    /// Clicks of different origins in one gate (e.g. signal on one detector,
    /// a noise count on the other).
    Mixed,
}

/// Bob's per-tick record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub tick_index: u64,
    pub outcome: Outcome,
    /// `None` exactly when the outcome is [`Outcome::NoClick`].
    pub cause: Option<Cause>,
}

/// Propagate a pulse through the channel: each photon independently
/// survives with probability `transmittance`; polarization is unchanged.
pub fn transmit<R: Rng>(pulse: &PulseEvent, params: &ChannelParams, rng: &mut R) -> ArrivalEvent {
    let mut survivors = 0u32;
    for _ in 0..pulse.photon_count {
        if rng.gen::<f64>() < params.transmittance {
            survivors += 1;
        }
    }
    ArrivalEvent {
        tick_index: pulse.tick_index,
        surviving_photons: survivors,
        polarization: pulse.polarization,
    }
}

/// Per-gate probability of a noise click on either detector,
/// `(R_bg + R_dark)·τ`.
pub fn noise_click_probability(params: &ChannelParams) -> Result<f64> {
    let p = (params.background_rate_hz + params.dark_rate_hz) * params.gate_window_s;
    if p >= 1.0 {
        return Err(Error::parameter(
            "noise_click_probability",
            format!("(R_bg + R_dark)·τ = {p} must be < 1"),
        ));
    }
    Ok(p)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ClickOrigin {
    None,
    Signal,
    Background,
    Dark,
}

fn noise_origin<R: Rng>(params: &ChannelParams, rng: &mut R) -> ClickOrigin {
    let total = params.background_rate_hz + params.dark_rate_hz;
    if rng.gen::<f64>() * total < params.background_rate_hz {
        ClickOrigin::Background
    } else {
        ClickOrigin::Dark
    }
}

/// Sample a noise click for one detector and merge it with any signal click
/// already registered there.
fn merge_noise<R: Rng>(
    origin: ClickOrigin,
    p_noise_per_detector: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> ClickOrigin {
    if p_noise_per_detector <= 0.0 {
        return origin;
    }
    if rng.gen::<f64>() < p_noise_per_detector {
        if origin == ClickOrigin::None {
            return noise_origin(params, rng);
        }
        // Signal already clicked this detector; the signal click explains
        // the detection.
    }
    origin
}

fn classify(tick_index: u64, origins: [ClickOrigin; 2]) -> DetectionRecord {
    // origins[0] is the bit-0 detector, origins[1] the bit-1 detector.
    let hit0 = origins[0] != ClickOrigin::None;
    let hit1 = origins[1] != ClickOrigin::None;
    let (outcome, cause) = match (hit0, hit1) {
        (false, false) => (Outcome::NoClick, None),
        (true, false) => (Outcome::Bit0, Some(single_cause(origins[0]))),
        (false, true) => (Outcome::Bit1, Some(single_cause(origins[1]))),
        (true, true) => (Outcome::Dual, Some(dual_cause(origins[0], origins[1]))),
    };
    DetectionRecord { tick_index, outcome, cause }
}

fn single_cause(origin: ClickOrigin) -> Cause {
    match origin {
        ClickOrigin::Signal => Cause::Signal,
        ClickOrigin::Background => Cause::Background,
        ClickOrigin::Dark => Cause::Dark,
        ClickOrigin::None => unreachable!("classified a click from no origin"),
    }
}

fn dual_cause(a: ClickOrigin, b: ClickOrigin) -> Cause {
    if a == b {
        single_cause(a)
    } else {
        Cause::Mixed
    }
}

/// Bob's B92 measurement for one gate.
///
/// The analyzer is oriented along `encode_b92(bob_bit, Bob)`. Each surviving
/// photon passes with the Malus-law probability and, if passed, is detected
/// with probability `η_D` on the detector for `bob_bit`. A rejected photon
/// reaches the opposite detector only via the `analyzer_extinction` leak.
/// Background/dark clicks land on each detector with probability
/// `p_noise/2`. Both detectors clicking in one gate yields a dual fire.
pub fn measure_b92<R: Rng>(
    arrival: &ArrivalEvent,
    bob_bit: bool,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<DetectionRecord> {
    let analyzer = encode_b92(bob_bit, Party::Bob);
    let p_pass = pass_probability(arrival.polarization, analyzer);

    let mut pass_signal = false;
    let mut opposite_signal = false;
    for _ in 0..arrival.surviving_photons {
        if rng.gen::<f64>() < p_pass {
            if rng.gen::<f64>() < params.detector_efficiency {
                pass_signal = true;
            }
        } else if params.analyzer_extinction > 0.0
            && rng.gen::<f64>() < params.analyzer_extinction
            && rng.gen::<f64>() < params.detector_efficiency
        {
            opposite_signal = true;
        }
    }

    let p_noise = noise_click_probability(params)?;
    let per_detector = p_noise / 2.0;

    // Detector order is fixed (bit 0 first) so the draw sequence is stable.
    let mut origins = [ClickOrigin::None, ClickOrigin::None];
    let pass_idx = usize::from(bob_bit);
    if pass_signal {
        origins[pass_idx] = ClickOrigin::Signal;
    }
    if opposite_signal {
        origins[1 - pass_idx] = ClickOrigin::Signal;
    }
    origins[0] = merge_noise(origins[0], per_detector, params, rng);
    origins[1] = merge_noise(origins[1], per_detector, params, rng);

    Ok(classify(arrival.tick_index, origins))
}

/// Bob's BB84 measurement for one gate: a polarizing beamsplitter in the
/// chosen basis with a detector on each output port. Every photon collapses
/// to one eigenstate (Born rule) and is detected there with probability
/// `η_D`; multi-photon pulses can therefore fire both detectors even with
/// perfect optics.
pub fn measure_bb84<R: Rng>(
    arrival: &ArrivalEvent,
    bob_basis: Basis,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<DetectionRecord> {
    let port1 = encode_bb84(true, bob_basis);
    let p_port1 = pass_probability(arrival.polarization, port1);

    let mut origins = [ClickOrigin::None, ClickOrigin::None];
    for _ in 0..arrival.surviving_photons {
        let idx = usize::from(rng.gen::<f64>() < p_port1);
        if rng.gen::<f64>() < params.detector_efficiency {
            origins[idx] = ClickOrigin::Signal;
        }
    }

    let p_noise = noise_click_probability(params)?;
    let per_detector = p_noise / 2.0;
    origins[0] = merge_noise(origins[0], per_detector, params, rng);
    origins[1] = merge_noise(origins[1], per_detector, params, rng);

    Ok(classify(arrival.tick_index, origins))
}

/// Lump optical misalignment and polarizer imperfections into a symmetric
/// bit-flip applied to single-click records. `NoClick` and `Dual` outcomes
/// are unchanged. `flip_probability` must be in `[0, 0.5]`.
pub fn apply_optical_error<R: Rng>(
    record: DetectionRecord,
    flip_probability: f64,
    rng: &mut R,
) -> Result<DetectionRecord> {
    if !(0.0..=0.5).contains(&flip_probability) {
        return Err(Error::parameter(
            "flip_probability",
            format!("must be in [0, 0.5], got {flip_probability}"),
        ));
    }
    if flip_probability == 0.0 {
        return Ok(record);
    }
    let flipped = match record.outcome {
        Outcome::Bit0 | Outcome::Bit1 => rng.gen::<f64>() < flip_probability,
        _ => false,
    };
    if !flipped {
        return Ok(record);
    }
    let outcome = match record.outcome {
        Outcome::Bit0 => Outcome::Bit1,
        Outcome::Bit1 => Outcome::Bit0,
        other => other,
    };
    Ok(DetectionRecord { outcome, ..record })
}
