//! Progressive rate-filling of information bits across component codes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Slack absorbed before rounding up, so that shares which are integers in
/// exact arithmetic do not round up because of floating-point noise.
pub const CEIL_SLACK: f64 = 1e-9;

/// Information-bit counts per component code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateAllocation {
    /// `K_k` for levels `1..=m` (stored 0-based).
    pub counts: Vec<usize>,
    /// `K = Σ K_k`.
    pub total: usize,
    /// 0-based levels in processing order (descending value).
    pub level_order: Vec<usize>,
}

/// Splits `k` information bits over levels in proportion to `values`.
///
/// Levels are visited from the largest value down (ties: smaller level
/// first). Each one takes `ceil(remaining * v / Σ remaining values)` bits,
/// capped at `n`. Bits that do not fit because of the cap spill into the
/// levels visited later; levels with value zero only receive spilled bits.
pub fn rate_fill(values: &[f64], k: usize, n: usize) -> Result<RateAllocation> {
    let m = values.len();
    if m == 0 {
        return invalid("rate filling needs at least one level");
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return invalid("rate-filling values must be finite and non-negative");
    }
    if !values.iter().any(|&v| v > 0.0) {
        return invalid("at least one rate-filling value must be positive");
    }
    if k > m * n {
        return Err(Error::Infeasible(format!("{k} bits do not fit in {m} codes of length {n}")));
    }

    let mut level_order: Vec<usize> = (0..m).collect();
    level_order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    super::note_sort(m);

    let mut counts = vec![0; m];
    let mut remaining = k;
    for (t, &level) in level_order.iter().enumerate() {
        let v = values[level];
        if v == 0.0 {
            continue;
        }
        let pool: f64 = level_order[t..].iter().map(|&l| values[l]).sum();
        let share = remaining as f64 * v / pool;
        let bits = ((share - CEIL_SLACK).ceil().max(0.0) as usize).min(n).min(remaining);
        counts[level] = bits;
        remaining -= bits;
    }
    for &level in &level_order {
        if remaining == 0 {
            break;
        }
        let extra = (n - counts[level]).min(remaining);
        counts[level] += extra;
        remaining -= extra;
    }
    debug_assert_eq!(remaining, 0);
    Ok(RateAllocation {
        counts,
        total: k,
        level_order,
    })
}
