use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::construction::solve_snr_capacity;
use crate::error::invalid;
use crate::mlc::{MlcScheme, MultistageDecoder};
use crate::Result;

use super::bler::{random_payloads, run_bler};
use super::channel::{awgn_transmit, frame_rng, rayleigh_power};
use super::config::{MethodKind, SimConfig, SimCurve, SimPoint};
use super::engine::{run_frames, with_workers, Budget, FrameOutcome};
use super::mcs::{McsEntry, McsTable};
use crate::analysis::noise_var;

/// BLER values below this are treated as this value when interpolating.
pub const BLER_FLOOR: f64 = 1e-7;

/// Measured BLER curve of one MCS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LutCurve {
    pub mcs: McsEntry,
    pub snr_db: Vec<f64>,
    pub bler: Vec<f64>,
}

/// Per-MCS BLER curves used to predict BLER at an instantaneous SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlerLut {
    pub curves: Vec<LutCurve>,
}

impl BlerLut {
    pub fn new(curves: Vec<LutCurve>) -> Result<Self> {
        if curves.is_empty() {
            return invalid("empty BLER table");
        }
        for c in &curves {
            if c.snr_db.is_empty() || c.snr_db.len() != c.bler.len() {
                return invalid(format!("MCS {}: malformed BLER curve", c.mcs.index));
            }
            if c.snr_db.windows(2).any(|w| w[1] <= w[0]) {
                return invalid(format!("MCS {}: SNR grid not increasing", c.mcs.index));
            }
            if c.bler.iter().any(|b| !(0.0..=1.0).contains(b)) {
                return invalid(format!("MCS {}: BLER outside [0, 1]", c.mcs.index));
            }
        }
        Ok(Self { curves })
    }

    /// Runs `cfg` for every MCS of `table` over `cfg.lut_snr_db` (or `cfg.snr_db`).
    pub fn measure(cfg: &SimConfig, table: &McsTable) -> Result<Self> {
        let grid = cfg.lut_snr_db.clone().unwrap_or_else(|| cfg.snr_db.clone());
        let curves = table
            .entries()
            .iter()
            .map(|mcs| {
                let run = SimConfig {
                    snr_db: grid.clone(),
                    ..cfg.with_mcs(mcs)
                };
                let curve = run_bler(&run)?;
                Ok(LutCurve {
                    mcs: *mcs,
                    snr_db: grid.clone(),
                    bler: curve.points.iter().map(|p| p.metric).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(curves)
    }

    /// Predicted BLER of curve `i` at `snr_db`: log-linear between grid
    /// points, 1 below the grid, the last value above it.
    pub fn predict(&self, i: usize, snr_db: f64) -> f64 {
        let c = &self.curves[i];
        if snr_db < c.snr_db[0] {
            return 1.0;
        }
        let last = c.snr_db.len() - 1;
        if snr_db >= c.snr_db[last] {
            return c.bler[last];
        }
        let j = c.snr_db.partition_point(|&s| s <= snr_db) - 1;
        let (a, b) = (c.bler[j].max(BLER_FLOOR).ln(), c.bler[j + 1].max(BLER_FLOOR).ln());
        let t = (snr_db - c.snr_db[j]) / (c.snr_db[j + 1] - c.snr_db[j]);
        (a + t * (b - a)).exp().min(1.0)
    }

    /// Curve maximizing `Q_m · R · (1 − BLER)` among those with predicted
    /// BLER at most `constraint`; the first curve when none qualifies.
    /// Ties keep the earlier curve.
    pub fn select(&self, snr_db: f64, constraint: f64) -> usize {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.curves.len() {
            let p = self.predict(i, snr_db);
            if p > constraint {
                continue;
            }
            let value = self.curves[i].mcs.spectral_efficiency() * (1.0 - p);
            if best.is_none_or(|(v, _)| value > v) {
                best = Some((value, i));
            }
        }
        best.map_or(0, |(_, i)| i)
    }
}

/// Adaptive-MCS throughput over Rayleigh block fading.
///
/// Each frame draws `|h|²` from a unit-mean exponential, selects an MCS from
/// `lut` at the instantaneous SNR `mean + 10 log10 |h|²`, and counts the
/// frame's information bits when every payload is decoded correctly. Each of
/// the `cfg.max_blocks` frames per point is simulated; the metric is
/// delivered bits per symbol.
pub fn run_throughput(cfg: &SimConfig, lut: &BlerLut) -> Result<SimCurve> {
    cfg.validate()?;
    let start = Instant::now();
    let schemes = lut
        .curves
        .iter()
        .map(|c| {
            let mcs_cfg = cfg.with_mcs(&c.mcs);
            let constellation = Constellation::with_order(mcs_cfg.m)?;
            let design = match cfg.method {
                MethodKind::Ga if cfg.ga_design_snr_db.is_none() => {
                    solve_snr_capacity(&constellation, mcs_cfg.k as f64 / cfg.n as f64)?
                }
                _ => f64::NAN,
            };
            Ok((MlcScheme::new(constellation, &mcs_cfg.construct(design)?)?, mcs_cfg.k as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let budget = Budget {
        max_blocks: cfg.max_blocks,
        max_errors: u64::MAX,
        batch: cfg.batch,
    };
    let points = with_workers(cfg.workers, || {
        cfg.snr_db
            .iter()
            .enumerate()
            .map(|(i, &mean)| {
                let tally = run_frames(
                    budget,
                    0,
                    || MultistageDecoder::new(cfg.n, cfg.list_size),
                    |dec, f| {
                        let mut rng = frame_rng(cfg.seed, i as u64, f);
                        let snr = mean + 10.0 * rayleigh_power(&mut rng).log10();
                        let (scheme, bits) = &schemes[lut.select(snr, cfg.bler_constraint)];
                        let payloads = random_payloads(&scheme.payload_lens(), &mut rng);
                        let tx = scheme.encode(&payloads).expect("payload lengths match");
                        let y = awgn_transmit(&tx.symbols, snr, &mut rng);
                        let out = dec.decode(scheme, &y, noise_var(snr)).expect("frame length matches");
                        let error = out.frame_error(&payloads);
                        FrameOutcome {
                            error,
                            level_mask: 0,
                            delivered_bits: if error { 0 } else { *bits },
                        }
                    },
                );
                SimPoint {
                    snr_db: mean,
                    metric: tally.delivered_bits as f64 / (tally.blocks * cfg.n as u64) as f64,
                    blocks: tally.blocks,
                    errors: tally.errors,
                    level_errors: Vec::new(),
                }
            })
            .collect()
    })?;
    Ok(SimCurve {
        metric: "throughput".into(),
        points,
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    })
}
