//! Polarization states, projective-measurement probabilities and photon
//! number statistics for weak coherent pulses.
//!
//! The B92 alphabet is two non-orthogonal linear polarizations (V for "0",
//! +45° for "1" on Alice's side) against two complementary analyzers (-45°
//! for "0", H for "1" on Bob's side). Crossed pairs are exactly orthogonal,
//! so Bob never records a false positive; matching pairs pass with
//! probability one half. BB84 uses the full four-state alphabet split into
//! rectilinear and diagonal bases.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Which side of the protocol prepared or analyzes a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Preparation/measurement basis for BB84.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// H/V basis: 0 -> H, 1 -> V.
    Rectilinear,
    /// ±45° basis: 0 -> +45°, 1 -> -45°.
    Diagonal,
}

/// A linear polarization, stored as an angle in degrees within `[0, 180)`
/// measured from horizontal. Linear polarizations are projective rays, so
/// angles 180° apart are the same state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationState {
    angle_degrees: f64,
}

impl PolarizationState {
    /// Horizontal, 0°.
    pub const H: PolarizationState = PolarizationState { angle_degrees: 0.0 };
    /// Vertical, 90°.
    pub const V: PolarizationState = PolarizationState { angle_degrees: 90.0 };
    /// Diagonal, +45°.
    pub const PLUS_45: PolarizationState = PolarizationState { angle_degrees: 45.0 };
    /// Anti-diagonal, -45° (= 135°).
    pub const MINUS_45: PolarizationState = PolarizationState { angle_degrees: 135.0 };

    /// Build a state from an arbitrary angle in degrees; the angle is
    /// normalized into `[0, 180)`.
    pub fn from_degrees(angle: f64) -> Self {
        PolarizationState { angle_degrees: normalize_angle(angle) }
    }

    /// The normalized angle in degrees.
    pub fn degrees(&self) -> f64 {
        self.angle_degrees
    }

    /// The state orthogonal to this one.
    pub fn orthogonal(&self) -> Self {
        Self::from_degrees(self.angle_degrees + 90.0)
    }
}

fn normalize_angle(angle: f64) -> f64 {
    let a = angle % 180.0;
    if a < 0.0 {
        a + 180.0
    } else {
        a
    }
}

/// Malus-law projection probability: the chance a photon in `state` passes
/// an analyzer oriented along `analyzer`, `cos²(Δθ)`. Symmetric in its
/// arguments. Differences that are exact multiples of 45° return exact
/// 0, 1/2 or 1 so the protocol alphabet never accumulates rounding error.
pub fn pass_probability(state: PolarizationState, analyzer: PolarizationState) -> f64 {
    let mut delta = (state.angle_degrees - analyzer.angle_degrees).abs();
    if delta > 90.0 {
        delta = 180.0 - delta;
    }
    match delta {
        0.0 => 1.0,
        45.0 => 0.5,
        90.0 => 0.0,
        d => {
            let c = d.to_radians().cos();
            c * c
        }
    }
}

/// B92 state for a bit: Alice prepares (0 -> V, 1 -> +45°), Bob analyzes
/// (0 -> -45°, 1 -> H). Alice's state for bit `b` is orthogonal to Bob's
/// analyzer for bit `1-b`, which is what makes a "pass" unambiguous.
pub fn encode_b92(bit: bool, party: Party) -> PolarizationState {
    match (party, bit) {
        (Party::Alice, false) => PolarizationState::V,
        (Party::Alice, true) => PolarizationState::PLUS_45,
        (Party::Bob, false) => PolarizationState::MINUS_45,
        (Party::Bob, true) => PolarizationState::H,
    }
}

/// BB84 state for a bit in a basis: rectilinear 0 -> H, 1 -> V;
/// diagonal 0 -> +45°, 1 -> -45°.
pub fn encode_bb84(bit: bool, basis: Basis) -> PolarizationState {
    match (basis, bit) {
        (Basis::Rectilinear, false) => PolarizationState::H,
        (Basis::Rectilinear, true) => PolarizationState::V,
        (Basis::Diagonal, false) => PolarizationState::PLUS_45,
        (Basis::Diagonal, true) => PolarizationState::MINUS_45,
    }
}

/// Photon-number statistics of the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonStatistics {
    /// Weak coherent pulses: Poisson-distributed photon numbers.
    Poisson,
    /// Idealized source emitting exactly this many photons per pulse.
    Fixed(u32),
}

/// A pulsed optical source characterized by its mean photon number and
/// clock rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSource {
    mean_photon_number: f64,
    pulse_rate_hz: f64,
    statistics: PhotonStatistics,
}

impl PulseSource {
    /// A Poisson (weak laser) source. `mean_photon_number` must be >= 0 and
    /// `pulse_rate_hz` > 0.
    pub fn poisson(mean_photon_number: f64, pulse_rate_hz: f64) -> Result<Self> {
        if !(mean_photon_number >= 0.0) {
            return Err(Error::parameter(
                "mean_photon_number",
                format!("must be >= 0, got {mean_photon_number}"),
            ));
        }
        if !(pulse_rate_hz > 0.0) {
            return Err(Error::parameter(
                "pulse_rate_hz",
                format!("must be > 0, got {pulse_rate_hz}"),
            ));
        }
        Ok(PulseSource {
            mean_photon_number,
            pulse_rate_hz,
            statistics: PhotonStatistics::Poisson,
        })
    }

    /// An idealized source emitting exactly `photons` per pulse.
    pub fn fixed(photons: u32, pulse_rate_hz: f64) -> Result<Self> {
        if !(pulse_rate_hz > 0.0) {
            return Err(Error::parameter(
                "pulse_rate_hz",
                format!("must be > 0, got {pulse_rate_hz}"),
            ));
        }
        Ok(PulseSource {
            mean_photon_number: photons as f64,
            pulse_rate_hz,
            statistics: PhotonStatistics::Fixed(photons),
        })
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.mean_photon_number
    }

    pub fn pulse_rate_hz(&self) -> f64 {
        self.pulse_rate_hz
    }

    pub fn statistics(&self) -> PhotonStatistics {
        self.statistics
    }

    /// Draw one pulse's photon count. Poisson sampling uses the product-of-
    /// uniforms method, which is exact and reproducible from the rng state.
    pub fn sample_photon_count<R: Rng>(&self, rng: &mut R) -> u32 {
        match self.statistics {
            PhotonStatistics::Fixed(n) => n,
            PhotonStatistics::Poisson => sample_poisson(self.mean_photon_number, rng),
        }
    }
}

fn sample_poisson<R: Rng>(mean: f64, rng: &mut R) -> u32 {
    if mean == 0.0 {
        return 0;
    }
    let threshold = (-mean).exp();
    let mut count = 0u32;
    let mut product: f64 = rng.gen();
    while product > threshold {
        count += 1;
        product *= rng.gen::<f64>();
    }
    count
}

/// One clock tick's optical pulse as it leaves the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub tick_index: u64,
    pub photon_count: u32,
    /// Ignored downstream when `photon_count` is zero.
    pub polarization: PolarizationState,
}

/// Probability that a pulse contains exactly `n` photons under Poisson
/// statistics with the given mean.
pub fn poisson_pmf(mean: f64, n: u32) -> f64 {
    let mut p = (-mean).exp();
    for k in 1..=n {
        p *= mean / k as f64;
    }
    p
}

/// Probability a Poisson pulse contains at least one photon, `1 - e^{-μ}`.
pub fn detectable_probability(mean: f64) -> f64 {
    -(-mean).exp_m1()
}

/// Fraction of detectable pulses (those with >= 1 photon) that carry more
/// than one photon: `(1 - e^{-μ} - μ e^{-μ}) / (1 - e^{-μ})`. This is the
/// exposure knob for beamsplitting and photon-number-splitting attacks.
pub fn multi_photon_fraction(mean: f64) -> Result<f64> {
    if !(mean > 0.0) {
        return Err(Error::parameter(
            "mean_photon_number",
            format!("must be > 0, got {mean}"),
        ));
    }
    let e = (-mean).exp();
    Ok((1.0 - e - mean * e) / (1.0 - e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, substream};
    use proptest::prelude::*;

    #[test]
    fn pass_probability_alphabet_cases() {
        // Orthogonal, identical and 45°-apart pairs are exact.
        assert_eq!(pass_probability(PolarizationState::V, PolarizationState::H), 0.0);
        assert_eq!(pass_probability(PolarizationState::V, PolarizationState::V), 1.0);
        assert_eq!(pass_probability(PolarizationState::PLUS_45, PolarizationState::H), 0.5);
        assert_eq!(
            pass_probability(PolarizationState::MINUS_45, PolarizationState::PLUS_45),
            0.0
        );
    }

    #[test]
    fn b92_encoding_follows_protocol_rules() {
        assert_eq!(encode_b92(false, Party::Alice), PolarizationState::V);
        assert_eq!(encode_b92(true, Party::Alice), PolarizationState::PLUS_45);
        assert_eq!(encode_b92(false, Party::Bob), PolarizationState::MINUS_45);
        assert_eq!(encode_b92(true, Party::Bob), PolarizationState::H);
    }

    #[test]
    fn b92_cross_orthogonality() {
        // Alice's state for bit b is orthogonal to Bob's analyzer for bit b'
        // exactly when b != b'; otherwise the overlap is 1/2.
        for alice_bit in [false, true] {
            for bob_bit in [false, true] {
                let p = pass_probability(
                    encode_b92(alice_bit, Party::Alice),
                    encode_b92(bob_bit, Party::Bob),
                );
                if alice_bit == bob_bit {
                    assert_eq!(p, 0.5);
                } else {
                    assert_eq!(p, 0.0);
                }
            }
        }
    }

    #[test]
    fn bb84_encoding_conventions() {
        assert_eq!(encode_bb84(false, Basis::Rectilinear), PolarizationState::H);
        assert_eq!(encode_bb84(true, Basis::Rectilinear), PolarizationState::V);
        assert_eq!(encode_bb84(false, Basis::Diagonal), PolarizationState::PLUS_45);
        assert_eq!(encode_bb84(true, Basis::Diagonal), PolarizationState::MINUS_45);
        // Same-basis states stay orthogonal.
        for basis in [Basis::Rectilinear, Basis::Diagonal] {
            assert_eq!(
                pass_probability(encode_bb84(false, basis), encode_bb84(true, basis)),
                0.0
            );
        }
    }

    #[test]
    fn vacuum_source_emits_nothing() {
        let source = PulseSource::poisson(0.0, 1e6).unwrap();
        let mut rng = substream(1, domain::TICK, 0);
        for _ in 0..100 {
            assert_eq!(source.sample_photon_count(&mut rng), 0);
        }
    }

    #[test]
    fn fixed_source_is_deterministic() {
        let source = PulseSource::fixed(1, 1e6).unwrap();
        let mut rng = substream(1, domain::TICK, 0);
        for _ in 0..10 {
            assert_eq!(source.sample_photon_count(&mut rng), 1);
        }
    }

    #[test]
    fn closed_forms_at_paper_mean() {
        // μ = 0.3: P(1) = 0.3 e^{-0.3}, P(>=1) = 1 - e^{-0.3}.
        assert!((poisson_pmf(0.3, 1) - 0.222_245_466_2).abs() < 1e-9);
        assert!((detectable_probability(0.3) - 0.259_181_779_3).abs() < 1e-9);
        assert!((multi_photon_fraction(0.3).unwrap() - 0.142_511_2).abs() < 1e-6);
    }

    #[test]
    fn multi_photon_fraction_at_unit_mean() {
        // Cross-checked by the Monte Carlo test below.
        assert!((multi_photon_fraction(1.0).unwrap() - 0.418_023_2).abs() < 1e-6);
    }

    #[test]
    fn multi_photon_fraction_rejects_nonpositive_mean() {
        assert!(multi_photon_fraction(0.0).is_err());
        assert!(multi_photon_fraction(-0.5).is_err());
    }

    #[test]
    fn poisson_empirical_pmf_matches_analytic() {
        // 10^6 draws at μ = 0.3; each bin up to n = 6 within 4 standard errors.
        let source = PulseSource::poisson(0.3, 1e6).unwrap();
        let mut rng = substream(17, domain::TICK, 0);
        let n_draws = 1_000_000u32;
        let mut counts = [0u64; 8];
        for _ in 0..n_draws {
            let n = source.sample_photon_count(&mut rng) as usize;
            counts[n.min(7)] += 1;
        }
        for n in 0..=6u32 {
            let p = poisson_pmf(0.3, n);
            let se = (p * (1.0 - p) / n_draws as f64).sqrt();
            let observed = counts[n as usize] as f64 / n_draws as f64;
            assert!(
                (observed - p).abs() <= 4.0 * se.max(1e-9),
                "bin {n}: observed {observed}, expected {p}, se {se}"
            );
        }
    }

    #[test]
    fn multi_photon_fraction_monte_carlo_unit_mean() {
        let source = PulseSource::poisson(1.0, 1e6).unwrap();
        let mut rng = substream(18, domain::TICK, 0);
        let mut detectable = 0u64;
        let mut multi = 0u64;
        for _ in 0..1_000_000 {
            let n = source.sample_photon_count(&mut rng);
            if n >= 1 {
                detectable += 1;
                if n > 1 {
                    multi += 1;
                }
            }
        }
        let observed = multi as f64 / detectable as f64;
        let expected = multi_photon_fraction(1.0).unwrap();
        let se = (expected * (1.0 - expected) / detectable as f64).sqrt();
        assert!((observed - expected).abs() < 4.0 * se);
    }

    proptest! {
        #[test]
        fn pass_probability_is_a_probability(a in 0.0f64..360.0, b in 0.0f64..360.0) {
            let p = pass_probability(
                PolarizationState::from_degrees(a),
                PolarizationState::from_degrees(b),
            );
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn pass_probability_identity_and_orthogonality(a in 0.0f64..360.0) {
            let s = PolarizationState::from_degrees(a);
            prop_assert_eq!(pass_probability(s, s), 1.0);
            prop_assert_eq!(pass_probability(s, s.orthogonal()), 0.0);
        }

        #[test]
        fn pass_probability_symmetry(a in 0.0f64..180.0, b in 0.0f64..180.0) {
            let sa = PolarizationState::from_degrees(a);
            let sb = PolarizationState::from_degrees(b);
            prop_assert_eq!(pass_probability(sa, sb), pass_probability(sb, sa));
        }

        #[test]
        fn multi_photon_fraction_is_monotone(mu in 0.01f64..5.0, delta in 0.01f64..1.0) {
            let lo = multi_photon_fraction(mu).unwrap();
            let hi = multi_photon_fraction(mu + delta).unwrap();
            prop_assert!(hi > lo);
        }
    }
}
