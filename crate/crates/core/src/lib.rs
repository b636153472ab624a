//! Simulator for atomic-frequency-comb optical memories.
//!
//! A comb of narrow absorption lines is painted into a transparent pit of an
//! inhomogeneously broadened line ([`spectral`]), weak pulses ([`pulses`]) are
//! sent through its causal linear response ([`propagation`]), and the output
//! is turned into photon-count histograms and analysed the way a counting
//! experiment would be ([`detection`]). [`scenario`] ties the pieces together
//! behind TOML configuration files and named presets.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod fft;
pub mod io;
pub mod propagation;
pub mod pulses;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
