//! Discrete-event simulation and feasibility toolkit for free-space quantum
//! key distribution.
//!
//! The crate models a complete weak-coherent-pulse QKD link in software:
//!
//! 1. **Quantum transmission** — Alice encodes random bits as polarized
//!    optical pulses ([`photonics`]), which cross a lossy, noisy free-space
//!    channel into Bob's gated detector pair ([`channel`]).
//! 2. **Sifting** — Bob publishes detection indices (never bit values) and
//!    both sides keep the unambiguous events ([`protocol`]).
//! 3. **Eavesdropping** — optional attack models (intercept-resend,
//!    beamsplitting, photon-number-splitting via QND) transform the pulse
//!    stream in flight and track what Eve learns ([`adversary`]).
//! 4. **Post-processing** — two-dimensional block-parity error correction,
//!    privacy amplification with exact leakage accounting
//!    ([`reconciliation`]), and one-time universal-hash authentication of
//!    every classical message ([`auth`]).
//! 5. **Feasibility analysis** — an analytic satellite/ground link-budget
//!    calculator and XOR key relay ([`linkbudget`]).
//!
//! The [`harness`] module wires the stages into reproducible sessions: a
//! [`harness::ScenarioConfig`] fully determines a run, and identical configs
//! produce byte-identical transcripts regardless of thread count.
//!
//! # Example
//!
//! ```
//! use qkd_sim::harness::{run_session, ScenarioConfig, SessionStatus};
//!
//! let config = ScenarioConfig::ideal(20_000, 7);
//! let outcome = run_session(&config).unwrap();
//! assert!(matches!(outcome.transcript.status, SessionStatus::Completed));
//! assert_eq!(outcome.alice_final.bits(), outcome.bob_final.bits());
//! ```
//!
//! Runnable walkthroughs for every capability live in `examples/`; the thin
//! `qkd-sim` binary exposes the same machinery as `simulate`, `linkbudget`,
//! `attack` and `reconcile-demo` subcommands.

pub mod adversary;
pub mod auth;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linkbudget;
pub mod messages;
pub mod photonics;
pub mod protocol;
pub mod reconciliation;
pub mod rng;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
