//! # Multilevel polar-coded modulation
//!
//! This crate builds multilevel polar-coded modulation (MLC-PCM) schemes and
//! checks them end to end:
//!
//! * [`constellation`]: Gray-labelled square QAM and per-level soft demapping.
//! * [`analysis`]: bit-subchannel capacities and dispersions of the
//!   modulation partition, finite-blocklength rates and error splits.
//! * [`construction`]: progressive rate-filling (capacity based and
//!   finite-blocklength based), reliability rank sequences and the Gaussian
//!   approximation baseline.
//! * [`polar`]: polar encoder, 5G CRC-16 and CRC-aided list decoding.
//! * [`mlc`]: the multilevel transmitter and multistage receiver.
//! * [`sim`]: Monte Carlo BLER curves, minimum required SNR searches and
//!   adaptive-modulation throughput over block fading.
//!
//! SNR values are always Es/N0 in dB with unit average symbol energy.

pub mod analysis;
pub mod constellation;
pub mod construction;
mod error;
pub mod mlc;
pub mod polar;
pub mod quadrature;
pub mod sim;

pub use error::{Error, Result};

/// A hard bit, stored as 0 or 1.
pub type Bit = u8;
