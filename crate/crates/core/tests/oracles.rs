//! Independent numerical oracles for the analysis, construction and
//! demapping routines.

use mlcpcm::analysis::{level_stats, noise_var};
use mlcpcm::constellation::{BitPrefix, Constellation};
use mlcpcm::construction::{ga_evolve, rate_fill, solve_snr_capacity};
use mlcpcm::Bit;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

mod common;
use common::{bits_of, rate_fill_trace, reference_point};

#[test]
fn reference_mapping_matches_crate() {
    let s10 = 10f64.sqrt();
    // 16QAM corner and inner points by hand
    assert!((reference_point(&[0, 0, 0, 0]) - Complex64::new(1.0, 1.0) / s10).norm() < 1e-15);
    assert!((reference_point(&[0, 0, 1, 1]) - Complex64::new(3.0, 3.0) / s10).norm() < 1e-15);
    assert!((reference_point(&[1, 0, 1, 0]) - Complex64::new(-3.0, 1.0) / s10).norm() < 1e-15);
    for m in [1, 2, 4, 6, 8] {
        let c = Constellation::with_order(m).unwrap();
        for label in 0..1usize << m {
            let bits = bits_of(label, m);
            assert!((c.map_bits(&bits).unwrap() - reference_point(&bits)).norm() < 1e-14, "m={m} {bits:?}");
        }
    }
}

#[test]
fn level_llr_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for draw in 0..1000 {
        let m = [1, 2, 4, 6, 8][draw % 5];
        let c = Constellation::with_order(m).unwrap();
        let k = rng.gen_range(1..=m);
        let prefix: Vec<Bit> = (0..k - 1).map(|_| rng.gen_range(0..2)).collect();
        let snr_db = rng.gen_range(-5.0..25.0);
        let n0 = noise_var(snr_db);
        let sent = reference_point(&bits_of(rng.gen_range(0..1usize << m), m));
        let sigma = (n0 / 2.0).sqrt();
        let y = sent + Complex64::new(sigma * rng.sample::<f64, _>(StandardNormal), sigma * rng.sample::<f64, _>(StandardNormal));

        // W_k(y, b_1^{k-1} | b) up to a common factor, summed over the free bits
        let metrics: Vec<(Bit, f64)> = (0..1usize << m)
            .map(|l| bits_of(l, m))
            .filter(|b| b[..k - 1] == prefix[..])
            .map(|b| (b[k - 1], -(y - reference_point(&b)).norm_sqr() / n0))
            .collect();
        let shift = metrics.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let sum = |bit: Bit| -> f64 { metrics.iter().filter(|x| x.0 == bit).map(|x| (x.1 - shift).exp()).sum() };
        let direct = (sum(0).ln() - sum(1).ln()).clamp(-300.0, 300.0);

        let got = c.level_llr(y, n0, &BitPrefix::new(k, prefix.clone()).unwrap());
        assert!(
            (got - direct).abs() <= 1e-9 * direct.abs().max(1.0),
            "draw {draw}: m={m} k={k} got {got} want {direct}"
        );
    }
}

/// Information densities `i_k` of every level for one received sample.
fn info_densities(points: &[Complex64], y: Complex64, label: usize, n0: f64, out: &mut [f64]) {
    let m = out.len();
    let metric: Vec<f64> = points.iter().map(|x| -(y - x).norm_sqr() / n0).collect();
    let shift = metric.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = metric.iter().map(|v| (v - shift).exp()).collect();
    // mass of labels sharing the first j bits with `label`
    let mass = |j: usize| -> f64 {
        let span = 1usize << (m - j);
        let start = (label >> (m - j)) * span;
        w[start..start + span].iter().sum()
    };
    for k in 1..=m {
        out[k - 1] = (2.0 * mass(k) / mass(k - 1)).log2();
    }
}

struct LevelMoments {
    mean: Vec<f64>,
    var: Vec<f64>,
    mean_se: Vec<f64>,
    var_se: Vec<f64>,
}

fn monte_carlo_levels(m: usize, snr_db: f64, samples: usize, seed: u64) -> LevelMoments {
    let points: Vec<Complex64> = (0..1usize << m).map(|l| reference_point(&bits_of(l, m))).collect();
    let n0 = noise_var(snr_db);
    let sigma = (n0 / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s1 = vec![0.0; m];
    let mut s2 = vec![0.0; m];
    let mut s3 = vec![0.0; m];
    let mut s4 = vec![0.0; m];
    let mut dens = vec![0.0; m];
    for _ in 0..samples {
        let label = rng.gen_range(0..1usize << m);
        let noise = Complex64::new(sigma * rng.sample::<f64, _>(StandardNormal), sigma * rng.sample::<f64, _>(StandardNormal));
        info_densities(&points, points[label] + noise, label, n0, &mut dens);
        for k in 0..m {
            let d = dens[k];
            s1[k] += d;
            s2[k] += d * d;
            s3[k] += d * d * d;
            s4[k] += d * d * d * d;
        }
    }
    let n = samples as f64;
    let mut out = LevelMoments { mean: vec![], var: vec![], mean_se: vec![], var_se: vec![] };
    for k in 0..m {
        let mu = s1[k] / n;
        let var = s2[k] / n - mu * mu;
        // fourth central moment from raw moments
        let mu4 = s4[k] / n - 4.0 * mu * s3[k] / n + 6.0 * mu * mu * s2[k] / n - 3.0 * mu.powi(4);
        out.mean.push(mu);
        out.var.push(var);
        out.mean_se.push((var / n).sqrt());
        out.var_se.push(((mu4 - var * var) / n).sqrt());
    }
    out
}

#[test]
fn sixteen_qam_capacity_and_dispersion_match_monte_carlo() {
    let mc = monte_carlo_levels(4, 10.0, 10_000_000, 77);
    let stats = level_stats(&Constellation::qam(4).unwrap(), 10.0);
    for (k, s) in stats.iter().enumerate() {
        let dc = (s.capacity - mc.mean[k]).abs();
        let dv = (s.dispersion - mc.var[k]).abs();
        assert!(dc <= 3.0 * mc.mean_se[k], "level {}: I {} vs MC {} ± {}", k + 1, s.capacity, mc.mean[k], mc.mean_se[k]);
        assert!(dv <= 3.0 * mc.var_se[k], "level {}: V {} vs MC {} ± {}", k + 1, s.dispersion, mc.var[k], mc.var_se[k]);
    }
}

#[test]
fn capacity_solver_matches_monte_carlo_bisection() {
    // common random numbers keep the MC capacity curve monotone in SNR
    let mc_capacity = |snr: f64| -> f64 { monte_carlo_levels(4, snr, 200_000, 5).mean.iter().sum() };
    let (mut lo, mut hi) = (-10.0, 30.0);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if mc_capacity(mid) < 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let solved = solve_snr_capacity(&Constellation::qam(4).unwrap(), 2.0).unwrap();
    assert!((solved - 0.5 * (lo + hi)).abs() < 0.05, "solver {solved} vs MC {}", 0.5 * (lo + hi));
}

#[test]
fn rate_fill_matches_step_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..50 {
        let m = [1, 2, 4, 6, 8][case % 5];
        let n = 1u64 << rng.gen_range(3..10);
        let p: Vec<u64> = (0..m)
            .map(|_| if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=1000) })
            .collect();
        if p.iter().all(|&v| v == 0) {
            continue;
        }
        let k = rng.gen_range(0..=m as u64 * n);
        let values: Vec<f64> = p.iter().map(|&v| v as f64 / 1000.0).collect();
        let got = rate_fill(&values, k as usize, n as usize).unwrap();
        let (order, counts) = rate_fill_trace(&p, k, n);
        assert_eq!(got.level_order, order, "case {case}: {p:?}");
        assert_eq!(got.counts.iter().map(|&c| c as u64).collect::<Vec<_>>(), counts, "case {case}: {p:?} K={k} N={n}");
    }
}

fn boxplus(a: f64, b: f64) -> f64 {
    2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh()
}

/// Genie-aided bit-channel LLRs for the all-zero codeword.
fn genie_bit_llrs(llrs: &[f64], out: &mut Vec<f64>) {
    if llrs.len() == 1 {
        out.push(llrs[0]);
        return;
    }
    let half = llrs.len() / 2;
    let upper: Vec<f64> = (0..half).map(|i| boxplus(llrs[i], llrs[i + half])).collect();
    let lower: Vec<f64> = (0..half).map(|i| llrs[i] + llrs[i + half]).collect();
    genie_bit_llrs(&upper, out);
    genie_bit_llrs(&lower, out);
}

#[test]
fn ga_ordering_matches_density_evolution_monte_carlo() {
    // BPSK at Es/N0 = 2 dB: channel LLR ~ N(4 Es/N0, 8 Es/N0)
    let snr = 10f64.powf(0.2);
    let mean = 4.0 * snr;
    let n = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut errors = vec![0.0f64; n];
    let samples = 1_000_000;
    let mut bit_llrs = Vec::with_capacity(n);
    for _ in 0..samples {
        let llrs: Vec<f64> = (0..n).map(|_| mean + (2.0 * mean).sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
        bit_llrs.clear();
        genie_bit_llrs(&llrs, &mut bit_llrs);
        for (e, &l) in errors.iter_mut().zip(&bit_llrs) {
            *e += if l < 0.0 { 1.0 } else if l == 0.0 { 0.5 } else { 0.0 };
        }
    }
    let ga = ga_evolve(mean, n);
    let mut by_ga: Vec<usize> = (0..n).collect();
    by_ga.sort_by(|&a, &b| ga[a].total_cmp(&ga[b]));
    let mut by_mc: Vec<usize> = (0..n).collect();
    by_mc.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]));
    assert_eq!(by_ga, by_mc, "GA means {ga:?}, MC errors {errors:?}");
}
