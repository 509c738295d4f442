use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analysis::noise_var;

/// SNRs at or above this are treated as noiseless.
pub const NOISELESS_SNR_DB: f64 = 200.0;

/// Independent stream for one frame, keyed by `(seed, point, frame)`.
///
/// Streams depend only on the key, never on scheduling.
pub fn frame_rng(seed: u64, point: u64, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    key[16..24].copy_from_slice(&frame.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// `y = x + n` with `n ~ CN(0, N0)`, `N0 = 10^(-snr/10)`.
pub fn awgn_transmit<R: Rng + ?Sized>(symbols: &[Complex64], snr_db: f64, rng: &mut R) -> Vec<Complex64> {
    if snr_db >= NOISELESS_SNR_DB {
        return symbols.to_vec();
    }
    let sigma = (noise_var(snr_db) / 2.0).sqrt();
    symbols
        .iter()
        .map(|x| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            x + Complex64::new(sigma * re, sigma * im)
        })
        .collect()
}

/// Rayleigh block-fading power gain `|h|²` with `h ~ CN(0, 1)`.
pub fn rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(rand_distr::Exp1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_above_clip() {
        let x = vec![Complex64::new(0.3, -0.7); 16];
        let mut rng = frame_rng(1, 0, 0);
        assert_eq!(awgn_transmit(&x, 200.0, &mut rng), x);
        assert_eq!(awgn_transmit(&x, f64::INFINITY, &mut rng), x);
    }

    #[test]
    fn empirical_noise_power() {
        let x = vec![Complex64::new(0.0, 0.0); 1_000_000];
        for snr in [-3.0, 7.0] {
            let y = awgn_transmit(&x, snr, &mut frame_rng(42, 1, 2));
            let power = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
            let re = y.iter().map(|v| v.re * v.re).sum::<f64>() / y.len() as f64;
            assert!((power / noise_var(snr) - 1.0).abs() < 0.01);
            assert!((re / (noise_var(snr) / 2.0) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let x = vec![Complex64::new(1.0, 0.0); 64];
        let a = awgn_transmit(&x, 5.0, &mut frame_rng(7, 3, 9));
        let b = awgn_transmit(&x, 5.0, &mut frame_rng(7, 3, 9));
        let c = awgn_transmit(&x, 5.0, &mut frame_rng(7, 3, 10));
        let d = awgn_transmit(&x, 5.0, &mut frame_rng(7, 4, 9));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn rayleigh_power_has_unit_mean() {
        let mut rng = frame_rng(0, 0, 0);
        let mean = (0..200_000).map(|_| rayleigh_power(&mut rng)).sum::<f64>() / 200_000.0;
        assert!((mean - 1.0).abs() < 0.01);
    }
}
