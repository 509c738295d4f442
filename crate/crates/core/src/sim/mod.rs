//! Monte Carlo link simulation.
//!
//! Every frame draws its randomness from a stream keyed by
//! `(seed, point, frame)` and frames are tallied in index order, so results
//! are identical for any worker count or batch size.

mod bler;
mod channel;
mod config;
mod engine;
mod mcs;
mod throughput;

pub use bler::{interpolate_log_bler, is_monotone, min_required_snr, run_bler, RequiredSnr, SNR_STEP_DB};
pub use channel::{awgn_transmit, frame_rng, rayleigh_power, NOISELESS_SNR_DB};
pub use config::{MethodKind, SequenceChoice, SimConfig, SimCurve, SimPoint};
pub use engine::{binomial_ci, run_frames, with_workers, Budget, FrameOutcome, Tally};
pub use mcs::{McsEntry, McsTable};
pub use throughput::{run_throughput, BlerLut, LutCurve, BLER_FLOOR};
