use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::noise_var;
use crate::constellation::Constellation;
use crate::construction::solve_snr_capacity;
use crate::mlc::{MlcScheme, MultistageDecoder};
use crate::{Bit, Error, Result};

use super::channel::{awgn_transmit, frame_rng};
use super::config::{SimConfig, SimCurve, SimPoint};
use super::engine::{binomial_ci, run_frames, with_workers, Budget, FrameOutcome, Tally};

/// Grid spacing of the required-SNR search, in dB.
pub const SNR_STEP_DB: f64 = 0.25;
/// Grid points tried in each direction before the search gives up.
const MAX_SEARCH_STEPS: i64 = 240;
/// Confidence of the intervals used to flag non-monotone estimates.
const MONOTONE_CONFIDENCE: f64 = 0.95;

pub(crate) fn random_payloads<R: Rng>(lens: &[usize], rng: &mut R) -> Vec<Vec<Bit>> {
    lens.iter()
        .map(|&len| (0..len).map(|_| rng.gen::<bool>() as Bit).collect())
        .collect()
}

/// One transmitted and decoded frame on stream `(seed, stream, frame)`.
pub(crate) fn simulate_frame(
    scheme: &MlcScheme,
    decoder: &mut MultistageDecoder,
    seed: u64,
    stream: u64,
    frame: u64,
    snr_db: f64,
) -> FrameOutcome {
    let mut rng = frame_rng(seed, stream, frame);
    let payloads = random_payloads(&scheme.payload_lens(), &mut rng);
    let tx = scheme.encode(&payloads).expect("payload lengths match the scheme");
    let y = awgn_transmit(&tx.symbols, snr_db, &mut rng);
    let out = decoder
        .decode(scheme, &y, noise_var(snr_db))
        .expect("frame length matches the decoder");
    let level_mask = out
        .level_errors(&payloads)
        .iter()
        .enumerate()
        .fold(0u32, |mask, (k, &e)| mask | (u32::from(e) << k));
    FrameOutcome {
        error: level_mask != 0,
        level_mask,
        delivered_bits: 0,
    }
}

fn budget(cfg: &SimConfig) -> Budget {
    Budget {
        max_blocks: cfg.max_blocks,
        max_errors: cfg.max_errors,
        batch: cfg.batch,
    }
}

fn simulate_point(cfg: &SimConfig, scheme: &MlcScheme, stream: u64, snr_db: f64, budget: Budget) -> Tally {
    run_frames(
        budget,
        scheme.levels(),
        || MultistageDecoder::new(cfg.n, cfg.list_size),
        |dec, f| simulate_frame(scheme, dec, cfg.seed, stream, f, snr_db),
    )
}

fn to_point(snr_db: f64, t: Tally) -> SimPoint {
    SimPoint {
        snr_db,
        metric: t.rate(),
        blocks: t.blocks,
        errors: t.errors,
        level_errors: t.level_errors,
    }
}

/// Monte Carlo BLER over `cfg.snr_db`; point `i` uses RNG stream `i`.
pub fn run_bler(cfg: &SimConfig) -> Result<SimCurve> {
    cfg.validate()?;
    let start = Instant::now();
    let constellation = Constellation::with_order(cfg.m)?;
    let fixed = if cfg.construction_is_fixed() {
        Some(MlcScheme::new(constellation.clone(), &cfg.construct(f64::NAN)?)?)
    } else {
        None
    };
    let points = with_workers(cfg.workers, || -> Result<Vec<SimPoint>> {
        cfg.snr_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| {
                let scheme = match &fixed {
                    Some(s) => s.clone(),
                    None => MlcScheme::new(constellation.clone(), &cfg.construct(snr)?)?,
                };
                Ok(to_point(snr, simulate_point(cfg, &scheme, i as u64, snr, budget(cfg))))
            })
            .collect()
    })??;
    Ok(SimCurve {
        metric: "bler".into(),
        points,
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    })
}

/// Outcome of a required-SNR search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequiredSnr {
    pub snr_db: f64,
    pub target_bler: f64,
    /// Probed grid points, ascending in SNR.
    pub probes: Vec<SimPoint>,
    /// Whether the search was repeated with a doubled budget.
    pub retried: bool,
    /// Estimates stayed non-monotone beyond their confidence intervals.
    pub warning: bool,
}

/// Smallest SNR reaching `target_bler`, from a 0.25 dB grid walk and
/// log-BLER interpolation between the bracketing grid points.
///
/// `cfg.snr_db` is ignored. Grid point `j` (SNR `j · 0.25`) uses RNG stream
/// `j`, so overlapping searches share samples.
pub fn min_required_snr(cfg: &SimConfig, target_bler: f64) -> Result<RequiredSnr> {
    cfg.validate()?;
    if !(target_bler > 0.0 && target_bler < 1.0) {
        return Err(Error::InvalidInput(format!("target BLER {target_bler} outside (0, 1)")));
    }
    let start = start_index(cfg)?;
    let first = search(cfg, target_bler, start, budget(cfg))?;
    if !first.warning {
        return Ok(first);
    }
    let doubled = Budget {
        max_blocks: cfg.max_blocks.saturating_mul(2),
        max_errors: cfg.max_errors.saturating_mul(2),
        batch: cfg.batch,
    };
    Ok(RequiredSnr {
        retried: true,
        ..search(cfg, target_bler, start, doubled)?
    })
}

fn start_index(cfg: &SimConfig) -> Result<i64> {
    let rate = cfg.k as f64 / cfg.n as f64;
    let c = Constellation::with_order(cfg.m)?;
    let guess = if cfg.k == 0 || cfg.k >= cfg.m * cfg.n {
        0.0
    } else {
        solve_snr_capacity(&c, rate)?
    };
    Ok((guess / SNR_STEP_DB).round() as i64)
}

fn search(cfg: &SimConfig, target: f64, start: i64, budget: Budget) -> Result<RequiredSnr> {
    let constellation = Constellation::with_order(cfg.m)?;
    let fixed = if cfg.construction_is_fixed() {
        Some(MlcScheme::new(constellation.clone(), &cfg.construct(f64::NAN)?)?)
    } else {
        None
    };
    let mut cache: BTreeMap<i64, SimPoint> = BTreeMap::new();
    let mut probe = |j: i64| -> Result<f64> {
        if let Some(p) = cache.get(&j) {
            return Ok(p.metric);
        }
        let snr = j as f64 * SNR_STEP_DB;
        let scheme = match &fixed {
            Some(s) => s.clone(),
            None => MlcScheme::new(constellation.clone(), &cfg.construct(snr)?)?,
        };
        let tally = with_workers(cfg.workers, || simulate_point(cfg, &scheme, j as u64, snr, budget))?;
        let point = to_point(snr, tally);
        let bler = point.metric;
        cache.insert(j, point);
        Ok(bler)
    };

    // find j with bler(j - 1) > target >= bler(j)
    let mut j = start;
    if probe(j)? > target {
        loop {
            j += 1;
            if j - start > MAX_SEARCH_STEPS {
                return Err(Error::Infeasible(format!("BLER {target} not reached on the search grid")));
            }
            if probe(j)? <= target {
                break;
            }
        }
    } else {
        loop {
            if start - j > MAX_SEARCH_STEPS {
                return Err(Error::Infeasible(format!("BLER never exceeds {target} on the search grid")));
            }
            if probe(j - 1)? > target {
                break;
            }
            j -= 1;
        }
    }
    let probes: Vec<SimPoint> = cache.into_values().collect();
    let lo = probes.iter().find(|p| (p.snr_db - (j - 1) as f64 * SNR_STEP_DB).abs() < 1e-9).expect("probed");
    let hi = probes.iter().find(|p| (p.snr_db - j as f64 * SNR_STEP_DB).abs() < 1e-9).expect("probed");
    let snr_db = interpolate_log_bler(lo, hi, target);
    let warning = !is_monotone(&probes);
    Ok(RequiredSnr {
        snr_db,
        target_bler: target,
        probes,
        retried: false,
        warning,
    })
}

/// Linear interpolation of `log BLER` between two grid points; a zero
/// estimate is replaced by half an error.
pub fn interpolate_log_bler(lo: &SimPoint, hi: &SimPoint, target: f64) -> f64 {
    let floor = |p: &SimPoint| p.metric.max(0.5 / p.blocks as f64).ln();
    let (a, b) = (floor(lo), floor(hi));
    if a <= b {
        return hi.snr_db;
    }
    let t = ((a - target.ln()) / (a - b)).clamp(0.0, 1.0);
    lo.snr_db + t * (hi.snr_db - lo.snr_db)
}

/// No point's BLER exceeds a lower-SNR point's beyond both confidence intervals.
pub fn is_monotone(points: &[SimPoint]) -> bool {
    let ci: Vec<(f64, f64)> = points
        .iter()
        .map(|p| binomial_ci(p.errors, p.blocks, MONOTONE_CONFIDENCE))
        .collect();
    (0..points.len()).all(|i| (i + 1..points.len()).all(|j| ci[j].0 <= ci[i].1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::MethodKind;

    fn point(snr_db: f64, errors: u64, blocks: u64) -> SimPoint {
        SimPoint {
            snr_db,
            metric: errors as f64 / blocks as f64,
            blocks,
            errors,
            level_errors: vec![],
        }
    }

    #[test]
    fn log_interpolation() {
        let lo = point(1.0, 100, 1000);
        let hi = point(1.25, 100, 100_000);
        assert!((interpolate_log_bler(&lo, &hi, 1e-2) - 1.125).abs() < 1e-12);
        assert_eq!(interpolate_log_bler(&lo, &hi, 1e-1), 1.0);
        let zero = point(1.25, 0, 1000);
        let s = interpolate_log_bler(&lo, &zero, 1e-2);
        assert!(s > 1.0 && s < 1.25);
    }

    #[test]
    fn monotonicity_uses_intervals() {
        assert!(is_monotone(&[point(0.0, 100, 200), point(0.25, 100, 190)]));
        assert!(!is_monotone(&[point(0.0, 100, 1000), point(0.25, 100, 200)]));
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let mut cfg = SimConfig::new(MethodKind::Rf1, 4, 64, 128, vec![200.0]);
        cfg.max_blocks = 100;
        let curve = run_bler(&cfg).unwrap();
        assert_eq!(curve.points[0].blocks, 100);
        assert_eq!(curve.points[0].errors, 0);
        assert_eq!(curve.points[0].metric, 0.0);
    }

    #[test]
    fn frame_error_is_union_of_level_errors() {
        let mut cfg = SimConfig::new(MethodKind::Rf2, 4, 64, 128, vec![4.0, 6.0]);
        cfg.max_blocks = 300;
        let curve = run_bler(&cfg).unwrap();
        for p in &curve.points {
            let max_level = *p.level_errors.iter().max().unwrap();
            let sum: u64 = p.level_errors.iter().sum();
            assert!(max_level <= p.errors && p.errors <= sum);
        }
    }
}
