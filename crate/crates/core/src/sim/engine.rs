use rayon::prelude::*;

use crate::error::Error;
use crate::Result;

/// Stopping rule and scheduling of one simulated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_blocks: u64,
    pub max_errors: u64,
    /// Frames evaluated per parallel batch.
    pub batch: usize,
}

/// What a single frame produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameOutcome {
    pub error: bool,
    /// Bit `k` set when level `k` is in error.
    pub level_mask: u32,
    pub delivered_bits: u64,
}

/// Accumulated outcomes in frame-index order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub blocks: u64,
    pub errors: u64,
    pub level_errors: Vec<u64>,
    pub delivered_bits: u64,
}

impl Tally {
    pub fn rate(&self) -> f64 {
        if self.blocks == 0 {
            0.0
        } else {
            self.errors as f64 / self.blocks as f64
        }
    }
}

/// Runs frames `0, 1, ..` until `max_blocks` frames or `max_errors` errors.
///
/// Frames are evaluated in parallel batches but consumed strictly in index
/// order, so the tally depends only on `frame` and the budget.
pub fn run_frames<S, I, F>(budget: Budget, levels: usize, init: I, frame: F) -> Tally
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> FrameOutcome + Sync + Send,
{
    let mut tally = Tally {
        level_errors: vec![0; levels],
        ..Tally::default()
    };
    let batch = budget.batch.max(1) as u64;
    let mut next = 0u64;
    'outer: while tally.blocks < budget.max_blocks && tally.errors < budget.max_errors {
        let end = (next + batch).min(budget.max_blocks);
        let outcomes: Vec<FrameOutcome> = (next..end).into_par_iter().map_init(&init, &frame).collect();
        for o in outcomes {
            tally.blocks += 1;
            tally.delivered_bits += o.delivered_bits;
            for (k, count) in tally.level_errors.iter_mut().enumerate() {
                *count += u64::from(o.level_mask >> k & 1);
            }
            if o.error {
                tally.errors += 1;
                if tally.errors >= budget.max_errors {
                    break 'outer;
                }
            }
        }
        next = end;
    }
    tally
}

/// Runs `f` on a pool of `workers` threads, or the global pool when `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Two-sided Clopper–Pearson interval for `errors` out of `blocks` trials.
pub fn binomial_ci(errors: u64, blocks: u64, confidence: f64) -> (f64, f64) {
    assert!(errors <= blocks && blocks > 0);
    let alpha = 1.0 - confidence;
    let (e, n) = (errors as f64, blocks as f64);
    let lo = if errors == 0 { 0.0 } else { beta_quantile(e, n - e + 1.0, alpha / 2.0) };
    let hi = if errors == blocks { 1.0 } else { beta_quantile(e + 1.0, n - e, 1.0 - alpha / 2.0) };
    (lo, hi)
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if statrs::function::beta::beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
