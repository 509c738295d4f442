//! Reference implementations shared by the integration test targets.
#![allow(dead_code)]

use mlcpcm::Bit;
use num_complex::Complex64;

/// Square QAM written directly from the per-axis amplitude recursion
/// `(1 - 2c_1)[2^(L-1) - (1 - 2c_2)[2^(L-2) - ..]]`, bits alternating I/Q.
pub fn reference_point(bits: &[Bit]) -> Complex64 {
    let m = bits.len();
    if m == 1 {
        return Complex64::new(1.0 - 2.0 * bits[0] as f64, 0.0);
    }
    let axis = |offset: usize| -> f64 {
        let axis_bits: Vec<f64> = bits.iter().skip(offset).step_by(2).map(|&b| 1.0 - 2.0 * b as f64).collect();
        let l = axis_bits.len();
        let mut amp = 1.0;
        for j in (1..l).rev() {
            amp = (1u32 << (l - j)) as f64 - axis_bits[j] * amp;
        }
        // amp now holds the bracket of the first bit
        axis_bits[0] * if l == 1 { 1.0 } else { amp }
    };
    let norm = match m {
        2 => 2.0,
        4 => 10.0,
        6 => 42.0,
        8 => 170.0,
        _ => unreachable!(),
    };
    Complex64::new(axis(0), axis(1)) / f64::sqrt(norm)
}

pub fn bits_of(label: usize, m: usize) -> Vec<Bit> {
    (0..m).map(|k| ((label >> (m - 1 - k)) & 1) as Bit).collect()
}

/// Step-by-step transcription of the progressive filling loop in exact
/// integer arithmetic; values are `p_k / 1000`.
pub fn rate_fill_trace(p: &[u64], k: u64, n: u64) -> (Vec<usize>, Vec<u64>) {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    // insertion sort, descending, stable
    for i in 1..m {
        let mut j = i;
        while j > 0 && p[order[j - 1]] < p[order[j]] {
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut counts = vec![0u64; m];
    let mut remaining = k;
    let mut pool: u64 = p.iter().sum();
    for &level in &order {
        if p[level] > 0 {
            let share = (remaining * p[level]).div_ceil(pool);
            let take = share.min(n).min(remaining);
            counts[level] = take;
            remaining -= take;
        }
        pool -= p[level];
    }
    for &level in &order {
        let extra = (n - counts[level]).min(remaining);
        counts[level] += extra;
        remaining -= extra;
    }
    assert_eq!(remaining, 0);
    (order, counts)
}
