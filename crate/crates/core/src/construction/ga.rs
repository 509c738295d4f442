//! Gaussian-approximation density evolution for polar codes.
//!
//! Bit-channel LLRs are modelled as consistent Gaussians `N(μ, 2μ)` and
//! tracked through their means. The variable-node rule doubles the mean and
//! the check-node rule is `1 - φ(μ') = (1 - φ(μ))^2`, with the usual
//! two-segment closed form for `φ`.

use crate::quadrature::QuadratureRule;

/// `ln φ(x)` for the two-segment approximation.
pub fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

pub fn phi(x: f64) -> f64 {
    ln_phi(x).exp()
}

/// Mean of the check-node output for two inputs of mean `mean`.
pub fn check_node_mean(mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let p = phi(mean).min(1.0);
    // 1 - (1 - p)^2 = p (2 - p), kept in the log domain for tiny p
    let target = ln_phi(mean) + (2.0 - p).ln();
    let (mut lo, mut hi) = (0.0f64, mean);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR of each synthesized channel of a length-`n` polar code whose
/// channel LLRs have mean `design_llr_mean`. Index `i` refers to `u_i` in
/// `x = u F^{⊗n}`; the most significant bit of `i` selects the first split.
pub fn ga_evolve(design_llr_mean: f64, n: usize) -> Vec<f64> {
    assert!(n.is_power_of_two(), "blocklength must be a power of two");
    let mut means = vec![design_llr_mean];
    while means.len() < n {
        let mut next = Vec::with_capacity(2 * means.len());
        for &m in &means {
            next.push(check_node_mean(m));
            next.push(2.0 * m);
        }
        means = next;
    }
    means
}

/// Capacity in bits of a BI-AWGN channel whose LLR has mean `mean`.
pub fn biawgn_capacity(mean: f64, rule: &QuadratureRule) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let sd = (2.0 * mean).sqrt();
    let loss = rule.expect(|z| softplus(-(mean + sd * z)));
    (1.0 - loss / std::f64::consts::LN_2).clamp(0.0, 1.0)
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Largest design mean handed to the evolution; surrogates at or above it
/// are treated as noiseless.
pub const MAX_DESIGN_MEAN: f64 = 1e4;
const MIN_DESIGN_MEAN: f64 = 1e-8;

/// Design LLR mean of the BI-AWGN channel with the given capacity.
pub fn biawgn_mean_for_capacity(capacity: f64, rule: &QuadratureRule) -> f64 {
    if capacity <= biawgn_capacity(MIN_DESIGN_MEAN, rule) {
        return MIN_DESIGN_MEAN;
    }
    if capacity >= biawgn_capacity(MAX_DESIGN_MEAN, rule) {
        return MAX_DESIGN_MEAN;
    }
    let (mut lo, mut hi) = (MIN_DESIGN_MEAN.ln(), MAX_DESIGN_MEAN.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if biawgn_capacity(mid.exp(), rule) < capacity {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}
