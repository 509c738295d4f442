//! Information-set construction for multilevel polar-coded modulation.
//!
//! Three methods are provided:
//!
//! * **RF-I** ([`construct_rf1`]): find the SNR at which the constellation
//!   capacity equals the target sum-rate `K / N`, then fill the levels in
//!   proportion to their bit-subchannel capacities at that SNR.
//! * **RF-II** ([`construct_rf2`]): the same with the normal-approximation
//!   rates of each level at blocklength `N` and a per-level error target.
//! * **GA** ([`construct_ga`]): per-level BI-AWGN surrogates of matching
//!   capacity at the actual channel SNR, Gaussian-approximation density
//!   evolution, and a global ranking of all `mN` bit channels.
//!
//! The two rate-filling methods depend only on `(m, K, N, sequence)`: the
//! per-level index ranking comes from a fixed [`RankSequence`] and the only
//! sort is over the `m` level values.

mod ga;
mod rate_fill;
mod sequence;

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

pub use ga::{
    biawgn_capacity, biawgn_mean_for_capacity, check_node_mean, ga_evolve, ln_phi, phi,
    MAX_DESIGN_MEAN,
};
pub use rate_fill::{rate_fill, RateAllocation, CEIL_SLACK};
pub use sequence::{RankSequence, SequenceKind, FIVE_G_MAX_LEN};

use crate::analysis::{channel_capacity, finite_bl_rate, level_stats, per_level_error_prob};
use crate::constellation::Constellation;
use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureRule;

/// Bisection bracket for the equivalent-channel SNR, in dB.
pub const SOLVER_BRACKET_DB: (f64, f64) = (-40.0, 50.0);
/// Closest a target sum-rate may come to `m`.
pub const RATE_MARGIN: f64 = 1e-6;
/// Default system BLER target for RF-II.
pub const DEFAULT_EPS: f64 = 0.1;
/// CRC length attached to component codes that are long enough to carry one.
pub const CRC_LEN: usize = 16;

const SOLVER_TOL: f64 = 1e-10;

thread_local! {
    static SORT_LOG: RefCell<Vec<usize>> = const { RefCell::new(Vec::new()) };
}

/// Records a sort of `len` values on the current thread.
pub(crate) fn note_sort(len: usize) {
    SORT_LOG.with(|log| log.borrow_mut().push(len));
}

fn take_sort_log() -> Vec<usize> {
    SORT_LOG.with(|log| std::mem::take(&mut *log.borrow_mut()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Rf1,
    Rf2 { eps: f64 },
    Ga { snr_db: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rf1 => "rf1",
            Method::Rf2 { .. } => "rf2",
            Method::Ga { .. } => "ga",
        }
    }
}

/// How CRC bits are attached to component codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrcPolicy {
    /// 16-bit CRC inside `K_k` whenever `K_k > 16`; shorter codes carry none.
    #[default]
    Standard,
    /// No CRC on any level.
    None,
}

impl CrcPolicy {
    pub fn crc_len(&self, info_bits: usize) -> usize {
        match self {
            CrcPolicy::Standard if info_bits > CRC_LEN => CRC_LEN,
            _ => 0,
        }
    }
}

/// One component code of the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCode {
    /// Information indices in `0..N`, ascending.
    pub info_set: Vec<usize>,
    /// CRC bits counted inside `info_set`.
    pub crc_len: usize,
}

impl LevelCode {
    pub fn info_bits(&self) -> usize {
        self.info_set.len()
    }

    pub fn payload_len(&self) -> usize {
        self.info_set.len() - self.crc_len
    }
}

/// Operation counts recorded while constructing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionStats {
    /// Length of every sort performed.
    pub sorts: Vec<usize>,
}

/// Information sets of all component codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeConstruction {
    pub method: Method,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// SNR of the surrogate channel (RF) or the actual channel (GA).
    pub design_snr_db: Option<f64>,
    /// Per-level values used for filling (capacities or finite-length rates).
    pub level_values: Vec<f64>,
    pub allocation: RateAllocation,
    pub levels: Vec<LevelCode>,
    pub stats: ConstructionStats,
}

impl CodeConstruction {
    pub fn counts(&self) -> &[usize] {
        &self.allocation.counts
    }

    /// Replaces the CRC policy on every level.
    pub fn with_crc_policy(mut self, policy: CrcPolicy) -> Self {
        for level in &mut self.levels {
            level.crc_len = policy.crc_len(level.info_set.len());
        }
        self
    }
}

/// SNR (dB) at which `I(X; Y)` equals `target_sum_rate`.
pub fn solve_snr_capacity(c: &Constellation, target_sum_rate: f64) -> Result<f64> {
    check_target(c, target_sum_rate)?;
    bisect(target_sum_rate, |snr| channel_capacity(c, snr))
}

/// Sum of the clamped finite-blocklength rates of all levels at `snr_db`.
pub fn finite_sum_rate(c: &Constellation, snr_db: f64, n: usize, eps: f64) -> Result<f64> {
    Ok(finite_level_rates(c, snr_db, n, eps)?.iter().sum())
}

/// `max(0, M(W_k, n, eps_k))` per level.
pub fn finite_level_rates(c: &Constellation, snr_db: f64, n: usize, eps: f64) -> Result<Vec<f64>> {
    let eps_k = per_level_error_prob(eps, c.order());
    level_stats(c, snr_db)
        .iter()
        .map(|s| finite_bl_rate(s.capacity, s.dispersion, n, eps_k).map(|r| r.max(0.0)))
        .collect()
}

/// SNR (dB) at which the clamped finite-blocklength sum-rate equals the target.
pub fn solve_snr_finite(c: &Constellation, target_sum_rate: f64, n: usize, eps: f64) -> Result<f64> {
    check_target(c, target_sum_rate)?;
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    if n == 0 {
        return invalid("blocklength must be positive");
    }
    // probe once so that invalid arguments surface as errors, not panics
    finite_sum_rate(c, 0.0, n, eps)?;
    bisect(target_sum_rate, |snr| {
        finite_sum_rate(c, snr, n, eps).expect("arguments validated above")
    })
}

fn check_target(c: &Constellation, target: f64) -> Result<()> {
    let high = c.order() as f64 - RATE_MARGIN;
    if !(target > 0.0 && target < high) {
        return Err(Error::Bracket {
            target,
            low: 0.0,
            high,
        });
    }
    Ok(())
}

fn bisect(target: f64, rate: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = SOLVER_BRACKET_DB;
    let (r_lo, r_hi) = (rate(lo), rate(hi));
    if !(r_lo <= target && target <= r_hi) {
        return Err(Error::Bracket {
            target,
            low: r_lo,
            high: r_hi,
        });
    }
    let mut best = (f64::INFINITY, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = rate(mid);
        let gap = r - target;
        if gap.abs() < best.0 {
            best = (gap.abs(), mid);
        }
        if gap.abs() < SOLVER_TOL || mid == lo || mid == hi {
            break;
        }
        if gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}

fn check_shape(m: usize, k: usize, n: usize, seq: &RankSequence) -> Result<()> {
    if !matches!(m, 1 | 2 | 4 | 6 | 8) {
        return invalid(format!("unsupported modulation order {m}"));
    }
    sequence::check_power_of_two(n)?;
    if n > seq.max_len() {
        return invalid(format!("blocklength {n} exceeds the rank sequence ({})", seq.max_len()));
    }
    if k > m * n {
        return Err(Error::Infeasible(format!("K = {k} exceeds mN = {}", m * n)));
    }
    Ok(())
}

fn assemble(
    method: Method,
    m: usize,
    k: usize,
    n: usize,
    design_snr_db: Option<f64>,
    level_values: Vec<f64>,
    seq: &RankSequence,
) -> Result<CodeConstruction> {
    let allocation = rate_fill(&level_values, k, n)?;
    let levels = allocation
        .counts
        .iter()
        .map(|&kk| {
            Ok(LevelCode {
                info_set: seq.most_reliable(n, kk)?,
                crc_len: CrcPolicy::Standard.crc_len(kk),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodeConstruction {
        method,
        m,
        n,
        k,
        design_snr_db,
        level_values,
        allocation,
        levels,
        stats: ConstructionStats {
            sorts: take_sort_log(),
        },
    })
}

/// Capacity-based progressive rate-filling.
pub fn construct_rf1(m: usize, k: usize, n: usize, seq: &RankSequence) -> Result<CodeConstruction> {
    check_shape(m, k, n, seq)?;
    take_sort_log();
    if k == 0 || k == m * n {
        return assemble(Method::Rf1, m, k, n, None, vec![1.0; m], seq);
    }
    let c = Constellation::with_order(m)?;
    let snr = solve_snr_capacity(&c, k as f64 / n as f64)?;
    let values = level_stats(&c, snr).iter().map(|s| s.capacity).collect();
    assemble(Method::Rf1, m, k, n, Some(snr), values, seq)
}

/// Finite-blocklength progressive rate-filling with system BLER target `eps`.
pub fn construct_rf2(
    m: usize,
    k: usize,
    n: usize,
    eps: f64,
    seq: &RankSequence,
) -> Result<CodeConstruction> {
    check_shape(m, k, n, seq)?;
    take_sort_log();
    let method = Method::Rf2 { eps };
    if k == 0 || k == m * n {
        return assemble(method, m, k, n, None, vec![1.0; m], seq);
    }
    let c = Constellation::with_order(m)?;
    let snr = solve_snr_finite(&c, k as f64 / n as f64, n, eps)?;
    let values = finite_level_rates(&c, snr, n, eps)?;
    assemble(method, m, k, n, Some(snr), values, seq)
}

/// Number of quadrature nodes for the BI-AWGN surrogate capacity.
const SURROGATE_NODES: usize = 64;

/// Online Gaussian-approximation construction at the actual channel SNR.
pub fn construct_ga(c: &Constellation, k: usize, n: usize, snr_db: f64) -> Result<CodeConstruction> {
    let m = c.order();
    sequence::check_power_of_two(n)?;
    if k > m * n {
        return Err(Error::Infeasible(format!("K = {k} exceeds mN = {}", m * n)));
    }
    if !snr_db.is_finite() {
        return invalid("GA construction needs a finite SNR");
    }
    take_sort_log();
    let rule = QuadratureRule::gauss_hermite(SURROGATE_NODES);
    let capacities: Vec<f64> = level_stats(c, snr_db).iter().map(|s| s.capacity).collect();
    let reliabilities: Vec<Vec<f64>> = capacities
        .iter()
        .map(|&cap| ga_evolve(biawgn_mean_for_capacity(cap, &rule), n))
        .collect();

    let mut ranked: Vec<(usize, usize)> = (0..m).flat_map(|l| (0..n).map(move |i| (l, i))).collect();
    // stable sort: equal reliabilities keep (smaller level, smaller index) first
    ranked.sort_by(|a, b| reliabilities[b.0][b.1].total_cmp(&reliabilities[a.0][a.1]));
    note_sort(ranked.len());

    let mut masks = vec![vec![false; n]; m];
    for &(l, i) in &ranked[..k] {
        masks[l][i] = true;
    }
    let levels: Vec<LevelCode> = masks
        .iter()
        .map(|mask| {
            let info_set: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
            let crc_len = CrcPolicy::Standard.crc_len(info_set.len());
            LevelCode { info_set, crc_len }
        })
        .collect();
    let counts: Vec<usize> = levels.iter().map(|l| l.info_set.len()).collect();
    let mut level_order: Vec<usize> = (0..m).collect();
    level_order.sort_by(|&a, &b| capacities[b].total_cmp(&capacities[a]));
    note_sort(m);
    Ok(CodeConstruction {
        method: Method::Ga { snr_db },
        m,
        n,
        k,
        design_snr_db: Some(snr_db),
        level_values: capacities,
        allocation: RateAllocation {
            counts,
            total: k,
            level_order,
        },
        levels,
        stats: ConstructionStats {
            sorts: take_sort_log(),
        },
    })
}
