//! Information-theoretic view of the modulation partition.
//!
//! A `2^m`-ary channel splits into bit subchannels `W_1 .. W_m`, where `W_k`
//! observes the channel output together with `b_1 .. b_{k-1}`. This module
//! evaluates their capacities and dispersions over AWGN with Gauss–Hermite
//! quadrature and provides the finite-blocklength helpers built on them.
//!
//! Square QAM with I/Q-alternating labels factors into two independent PAM
//! channels, so the per-level quantities are evaluated on one axis at a time.
//! Because the tensor-product rule integrates such functions as a product of
//! one-dimensional rules, this is the same number the full 2-D rule gives up
//! to rounding; [`Analyzer::level_stats_2d`] keeps the full 2-D evaluation as
//! a reference.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, PamAxis};
use crate::error::{invalid, Result};
use crate::quadrature::{QuadratureRule, DEFAULT_NODES};

/// Per-level statistics of the modulation partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    /// 1-based level index.
    pub level: usize,
    /// `I(W_k)` in bits.
    pub capacity: f64,
    /// `V_k` in bits squared.
    pub dispersion: f64,
    /// Normal-approximation rate, when a blocklength and error target were given.
    pub fbl_rate: Option<f64>,
}

/// Complex noise variance `N0` for a given Es/N0 with unit symbol energy.
pub fn noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Quadrature-based evaluator. Cheap to clone; holds only the rule.
#[derive(Debug, Clone)]
pub struct Analyzer {
    rule: QuadratureRule,
}

impl Default for Analyzer {
    fn default() -> Self {
        Self::new(DEFAULT_NODES)
    }
}

// first and second moments of the information density per level
#[derive(Clone, Copy, Default)]
struct Moments {
    first: f64,
    second: f64,
}

impl Analyzer {
    pub fn new(nodes: usize) -> Self {
        Self {
            rule: QuadratureRule::gauss_hermite(nodes),
        }
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Capacity and dispersion of every level at `snr_db`.
    pub fn level_stats(&self, c: &Constellation, snr_db: f64) -> Vec<LevelStats> {
        let sigma = (noise_var(snr_db) / 2.0).sqrt();
        let in_phase = self.axis_moments(c.in_phase(), sigma);
        let quadrature = self.axis_moments(c.quadrature(), sigma);
        (1..=c.order())
            .map(|k| {
                let m = if k % 2 == 1 {
                    in_phase[(k - 1) / 2]
                } else {
                    quadrature[k / 2 - 1]
                };
                stats_from_moments(k, m)
            })
            .collect()
    }

    pub fn subchannel_capacity(&self, c: &Constellation, k: usize, snr_db: f64) -> f64 {
        self.level_stats(c, snr_db)[k - 1].capacity
    }

    pub fn subchannel_dispersion(&self, c: &Constellation, k: usize, snr_db: f64) -> f64 {
        self.level_stats(c, snr_db)[k - 1].dispersion
    }

    /// `I(X; Y)` for equiprobable inputs, in bits.
    pub fn channel_capacity(&self, c: &Constellation, snr_db: f64) -> f64 {
        let sigma = (noise_var(snr_db) / 2.0).sqrt();
        self.axis_mutual_information(c.in_phase(), sigma)
            + self.axis_mutual_information(c.quadrature(), sigma)
    }

    /// Per-level moments of one PAM axis; entry `j` belongs to the axis's
    /// `j`-th label bit.
    fn axis_moments(&self, axis: &PamAxis, sigma: f64) -> Vec<Moments> {
        let bits = axis.bits;
        let mut acc = vec![Moments::default(); bits];
        if bits == 0 {
            return acc;
        }
        let size = axis.levels.len();
        let inv = 1.0 / (2.0 * sigma * sigma);
        let mut metrics = vec![0.0; size];
        let mut tree = vec![0.0; 2 * size];
        for (p, &a) in axis.levels.iter().enumerate() {
            for (&z, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let y = a + sigma * z;
                for (m, &b) in metrics.iter_mut().zip(&axis.levels) {
                    *m = -(y - b) * (y - b) * inv;
                }
                prefix_sums(&metrics, &mut tree);
                let mut previous = tree[1];
                for (j, slot) in acc.iter_mut().enumerate() {
                    let depth = j + 1;
                    let current = tree[(1 << depth) + (p >> (bits - depth))];
                    let density = 1.0 + (current - previous) / LN_2;
                    slot.first += w * density;
                    slot.second += w * density * density;
                    previous = current;
                }
            }
        }
        let scale = 1.0 / size as f64;
        for slot in &mut acc {
            slot.first *= scale;
            slot.second *= scale;
        }
        acc
    }

    fn axis_mutual_information(&self, axis: &PamAxis, sigma: f64) -> f64 {
        if axis.bits == 0 {
            return 0.0;
        }
        let inv = 1.0 / (2.0 * sigma * sigma);
        let mut total = 0.0;
        for &a in &axis.levels {
            for (&z, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let y = a + sigma * z;
                let own = -(sigma * z) * (sigma * z) * inv;
                let all = log_sum_exp_slice(axis.levels.iter().map(|&b| -(y - b) * (y - b) * inv));
                total += w * (axis.bits as f64 + (own - all) / LN_2);
            }
        }
        total / axis.levels.len() as f64
    }

    /// Per-level statistics from the full 2-D tensor-product rule over the
    /// complex noise, without using the axis factorisation.
    pub fn level_stats_2d(&self, c: &Constellation, snr_db: f64) -> Vec<LevelStats> {
        let n0 = noise_var(snr_db);
        let sigma = (n0 / 2.0).sqrt();
        let grid = self.rule.complex_grid();
        let m = c.order();
        let size = c.points().len();
        let mut acc = vec![Moments::default(); m];
        let mut metrics = vec![0.0; size];
        let mut tree = vec![0.0; 2 * size];
        for (p, &x) in c.points().iter().enumerate() {
            for &(zr, zi, w) in &grid {
                let y = x + num_complex::Complex64::new(sigma * zr, sigma * zi);
                for (mv, q) in metrics.iter_mut().zip(c.points()) {
                    *mv = -(y - q).norm_sqr() / n0;
                }
                prefix_sums(&metrics, &mut tree);
                let mut previous = tree[1];
                for (j, slot) in acc.iter_mut().enumerate() {
                    let depth = j + 1;
                    let current = tree[(1 << depth) + (p >> (m - depth))];
                    let density = 1.0 + (current - previous) / LN_2;
                    slot.first += w * density;
                    slot.second += w * density * density;
                    previous = current;
                }
            }
        }
        (1..=m)
            .map(|k| {
                let mut mo = acc[k - 1];
                mo.first /= size as f64;
                mo.second /= size as f64;
                stats_from_moments(k, mo)
            })
            .collect()
    }

    /// `I(X; Y)` from the full 2-D rule.
    pub fn channel_capacity_2d(&self, c: &Constellation, snr_db: f64) -> f64 {
        let n0 = noise_var(snr_db);
        let sigma = (n0 / 2.0).sqrt();
        let grid = self.rule.complex_grid();
        let m = c.order() as f64;
        let mut total = 0.0;
        for &x in c.points() {
            for &(zr, zi, w) in &grid {
                let noise = num_complex::Complex64::new(sigma * zr, sigma * zi);
                let y = x + noise;
                let own = -noise.norm_sqr() / n0;
                let all = log_sum_exp_slice(c.points().iter().map(|q| -(y - q).norm_sqr() / n0));
                total += w * (m + (own - all) / LN_2);
            }
        }
        total / c.points().len() as f64
    }
}

fn stats_from_moments(level: usize, m: Moments) -> LevelStats {
    let capacity = m.first.clamp(0.0, 1.0);
    let raw = m.second - m.first * m.first;
    debug_assert!(raw > -1e-10, "negative dispersion {raw}: quadrature failure");
    LevelStats {
        level,
        capacity,
        dispersion: raw.max(0.0),
        fbl_rate: None,
    }
}

/// Fills a heap-ordered log-sum-exp tree: node `(1 << d) + g` holds the
/// log-sum over the `g`-th contiguous block of `len >> d` leaves.
fn prefix_sums(leaves: &[f64], tree: &mut [f64]) {
    let len = leaves.len();
    tree[len..2 * len].copy_from_slice(leaves);
    for node in (1..len).rev() {
        tree[node] = log_add(tree[2 * node], tree[2 * node + 1]);
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn log_sum_exp_slice(values: impl Iterator<Item = f64> + Clone) -> f64 {
    crate::constellation::log_sum_exp(values)
}

thread_local! {
    static DEFAULT_ANALYZER: Analyzer = Analyzer::default();
}

/// `I(W_k)` at the default quadrature order.
pub fn subchannel_capacity(c: &Constellation, k: usize, snr_db: f64) -> f64 {
    DEFAULT_ANALYZER.with(|a| a.subchannel_capacity(c, k, snr_db))
}

/// `V_k` at the default quadrature order.
pub fn subchannel_dispersion(c: &Constellation, k: usize, snr_db: f64) -> f64 {
    DEFAULT_ANALYZER.with(|a| a.subchannel_dispersion(c, k, snr_db))
}

/// `I(X; Y)` at the default quadrature order.
pub fn channel_capacity(c: &Constellation, snr_db: f64) -> f64 {
    DEFAULT_ANALYZER.with(|a| a.channel_capacity(c, snr_db))
}

/// All levels at the default quadrature order.
pub fn level_stats(c: &Constellation, snr_db: f64) -> Vec<LevelStats> {
    DEFAULT_ANALYZER.with(|a| a.level_stats(c, snr_db))
}

/// Gaussian tail probability `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_function`] on `(0, 1)`, by bisection to below `1e-12`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("Q^-1 needs a probability in (0, 1), got {p}"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Normal approximation `C - sqrt(V / n) Q^-1(eps)`; may be negative.
pub fn finite_bl_rate(capacity: f64, dispersion: f64, n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return invalid("blocklength must be positive");
    }
    if dispersion < 0.0 {
        return invalid("dispersion must be non-negative");
    }
    let backoff = (dispersion / n as f64).sqrt() * q_inverse(eps)?;
    Ok(capacity - backoff)
}

/// Per-level error probability `1 - (1 - eps)^(1/m)` for a system target `eps`.
pub fn per_level_error_prob(eps: f64, m: usize) -> f64 {
    assert!((0.0..1.0).contains(&eps) && m >= 1, "eps in [0, 1) and m >= 1");
    -((-eps).ln_1p() / m as f64).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_function_basics() {
        assert_eq!(q_function(0.0), 0.5);
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
        assert!((q_inverse(0.1).unwrap() - 1.281_551_565_544_600_4).abs() < 1e-12);
        assert!(q_inverse(0.0).is_err());
        assert!(q_inverse(1.0).is_err());
        assert!(q_inverse(f64::NAN).is_err());
        for p in [1e-9, 1e-4, 0.01, 0.3, 0.77, 0.999] {
            let x = q_inverse(p).unwrap();
            assert!((q_function(x) - p).abs() < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn finite_rate_cases() {
        assert_eq!(finite_bl_rate(0.7, 0.3, 100, 0.5).unwrap(), 0.7);
        assert_eq!(finite_bl_rate(0.7, 0.0, 100, 0.01).unwrap(), 0.7);
        let r = finite_bl_rate(0.5, 0.25, 256, 0.1).unwrap();
        assert!((r - (0.5 - 0.5 / 16.0 * 1.281_551_565_544_600_4)).abs() < 1e-12);
        assert!((r - 0.45995).abs() < 1e-5);
        assert!(finite_bl_rate(0.5, 0.25, 0, 0.1).is_err());
    }

    #[test]
    fn error_split() {
        assert_eq!(per_level_error_prob(0.1, 1), 0.1);
        assert_eq!(per_level_error_prob(0.0, 4), 0.0);
        let e = per_level_error_prob(0.1, 4);
        assert!((1.0 - (1.0 - e).powi(4) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn qpsk_levels_are_symmetric() {
        let c = Constellation::qam(2).unwrap();
        for snr in [-5.0, 0.0, 3.0, 12.0] {
            let s = level_stats(&c, snr);
            assert!((s[0].capacity - s[1].capacity).abs() < 1e-9);
        }
    }

    #[test]
    fn limits() {
        for m in [1, 2, 4, 6, 8] {
            let c = Constellation::with_order(m).unwrap();
            for s in level_stats(&c, 60.0) {
                assert!((s.capacity - 1.0).abs() < 1e-6, "m={m} level {}", s.level);
                assert!(s.dispersion < 1e-5);
            }
            // low-SNR capacity is at most snr · log2(e) per complex dimension
            let bound = 1e-6 * std::f64::consts::LOG2_E;
            for s in level_stats(&c, -60.0) {
                assert!(s.capacity <= bound * 1.0001);
                assert!(s.dispersion < 1e-5);
            }
            assert!((channel_capacity(&c, 60.0) - m as f64).abs() < 1e-6);
            assert!(channel_capacity(&c, -60.0) <= bound * 1.0001);
        }
    }

    #[test]
    fn separable_path_matches_2d_rule() {
        let a = Analyzer::default();
        for m in [1, 2, 4] {
            let c = Constellation::with_order(m).unwrap();
            for snr in [-3.0, 4.0, 11.0] {
                let fast = a.level_stats(&c, snr);
                let full = a.level_stats_2d(&c, snr);
                for (f, g) in fast.iter().zip(&full) {
                    assert!((f.capacity - g.capacity).abs() < 1e-12);
                    assert!((f.dispersion - g.dispersion).abs() < 1e-11);
                }
                let direct = a.channel_capacity_2d(&c, snr);
                assert!((a.channel_capacity(&c, snr) - direct).abs() < 1e-12);
            }
        }
    }
}
