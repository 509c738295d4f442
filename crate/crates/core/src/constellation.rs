//! Square QAM signal sets with per-axis Gray labelling.
//!
//! Labels follow TS 38.211: bits alternate between the in-phase and
//! quadrature axes (`b_1, b_3, ...` on I and `b_2, b_4, ...` on Q) and each axis
//! carries a binary-reflected Gray code. For 16QAM the in-phase amplitude is
//! `(1 - 2 b_1) (2 - (1 - 2 b_3)) / sqrt(10)`, which gives the per-axis table
//!
//! | amplitude | -3 | -1 | +1 | +3 |
//! |-----------|----|----|----|----|
//! | bits      | 11 | 10 | 00 | 01 |
//!
//! Higher orders nest the same recursion. Points are stored by label value,
//! with `b_1` as the most significant bit, so the labelling map is the
//! identity on indices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Bit;

/// Saturation bound for log-likelihood ratios.
pub const LLR_CLIP: f64 = 300.0;

/// One axis of a square constellation: a PAM signal set with its own labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PamAxis {
    /// Number of label bits carried by the axis.
    pub bits: usize,
    /// Amplitudes indexed by the per-axis label (first axis bit is the MSB).
    pub levels: Vec<f64>,
}

/// A `2^m`-ary signal set together with its bit labelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    order: usize,
    points: Vec<Complex64>,
    in_phase: PamAxis,
    quadrature: PamAxis,
}

/// Decoded bits `b_1 .. b_{k-1}` that condition the soft demapper of level `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPrefix {
    level: usize,
    bits: Vec<Bit>,
}

impl BitPrefix {
    /// Builds the prefix for `level` (1-based); `bits` must hold `level - 1` bits.
    pub fn new(level: usize, bits: Vec<Bit>) -> Result<Self> {
        if level == 0 {
            return invalid("levels are numbered from 1");
        }
        if bits.len() != level - 1 {
            return Err(Error::LengthMismatch {
                expected: level - 1,
                actual: bits.len(),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return invalid("prefix bits must be 0 or 1");
        }
        Ok(Self { level, bits })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    /// Prefix bits read as an integer, first bit most significant.
    pub fn value(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }
}

fn gray_pam(bits: usize) -> Vec<f64> {
    if bits == 0 {
        return vec![0.0];
    }
    let scale = (2.0 * ((1u64 << (2 * bits)) as f64 - 1.0) / 3.0).sqrt();
    (0..1usize << bits)
        .map(|label| {
            let bit = |j: usize| ((label >> (bits - 1 - j)) & 1) as f64;
            let mut inner = 1.0;
            for j in (1..bits).rev() {
                inner = (1u64 << (bits - j)) as f64 - (1.0 - 2.0 * bit(j)) * inner;
            }
            (1.0 - 2.0 * bit(0)) * inner / scale
        })
        .collect()
}

impl Constellation {
    /// Square QAM of order `m` bits per symbol, `m` in {2, 4, 6, 8}.
    pub fn qam(m: usize) -> Result<Self> {
        if !matches!(m, 2 | 4 | 6 | 8) {
            return invalid(format!("square QAM needs an even order in 2..=8, got {m}"));
        }
        let per_axis = m / 2;
        let in_phase = PamAxis {
            bits: per_axis,
            levels: gray_pam(per_axis),
        };
        let quadrature = in_phase.clone();
        Ok(Self::from_axes(m, in_phase, quadrature))
    }

    /// Real antipodal signalling, `b = 0 -> +1`, `b = 1 -> -1`.
    pub fn bpsk() -> Self {
        let in_phase = PamAxis {
            bits: 1,
            levels: vec![1.0, -1.0],
        };
        let quadrature = PamAxis {
            bits: 0,
            levels: vec![0.0],
        };
        Self::from_axes(1, in_phase, quadrature)
    }

    /// BPSK for `m = 1`, square QAM otherwise.
    pub fn with_order(m: usize) -> Result<Self> {
        if m == 1 {
            Ok(Self::bpsk())
        } else {
            Self::qam(m)
        }
    }

    fn from_axes(order: usize, in_phase: PamAxis, quadrature: PamAxis) -> Self {
        let points = (0..1usize << order)
            .map(|label| {
                let (i, q) = split_label(label, order);
                Complex64::new(in_phase.levels[i], quadrature.levels[q])
            })
            .collect();
        Self {
            order,
            points,
            in_phase,
            quadrature,
        }
    }

    /// Bits per symbol.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Signal points indexed by label value.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn in_phase(&self) -> &PamAxis {
        &self.in_phase
    }

    pub fn quadrature(&self) -> &PamAxis {
        &self.quadrature
    }

    /// Label value of `b_1 .. b_m`, `b_1` most significant.
    pub fn label_of(&self, bits: &[Bit]) -> Result<usize> {
        if bits.len() != self.order {
            return Err(Error::LengthMismatch {
                expected: self.order,
                actual: bits.len(),
            });
        }
        Ok(bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize))
    }

    pub fn map_bits(&self, bits: &[Bit]) -> Result<Complex64> {
        Ok(self.points[self.label_of(bits)?])
    }

    /// Average symbol energy; unity for every constructor.
    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Level-`k` LLR `ln W_k(y, b_1^{k-1} | 0) / W_k(y, b_1^{k-1} | 1)`.
    ///
    /// `noise_var` is the complex noise variance `N0`, i.e. `N0 / 2` per real
    /// dimension. The result is clipped to `±LLR_CLIP`.
    pub fn level_llr(&self, y: Complex64, noise_var: f64, prefix: &BitPrefix) -> f64 {
        debug_assert!(prefix.level() <= self.order);
        self.level_llr_raw(y, noise_var, prefix.level(), prefix.value())
    }

    /// [`level_llr`](Self::level_llr) with the prefix given as an integer.
    pub(crate) fn level_llr_raw(&self, y: Complex64, noise_var: f64, level: usize, prefix: usize) -> f64 {
        let span = 1usize << (self.order - level + 1);
        let base = prefix * span;
        let half = span / 2;
        let inv = 1.0 / noise_var;
        let metric = |label: usize| -(y - self.points[label]).norm_sqr() * inv;
        let zero = log_sum_exp((base..base + half).map(metric));
        let one = log_sum_exp((base + half..base + span).map(metric));
        clip_llr(zero - one)
    }
}

/// Splits a label into its in-phase and quadrature per-axis labels.
pub(crate) fn split_label(label: usize, order: usize) -> (usize, usize) {
    let mut i = 0;
    let mut q = 0;
    for k in 0..order {
        let bit = (label >> (order - 1 - k)) & 1;
        if k % 2 == 0 {
            i = (i << 1) | bit;
        } else {
            q = (q << 1) | bit;
        }
    }
    (i, q)
}

pub(crate) fn clip_llr(llr: f64) -> f64 {
    if llr.is_nan() {
        0.0
    } else {
        llr.clamp(-LLR_CLIP, LLR_CLIP)
    }
}

/// Numerically safe `ln Σ exp(x)`.
pub fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}
