//! Property suites for the codec, the rank sequences and the channel analysis.

use mlcpcm::analysis::{channel_capacity, finite_bl_rate, level_stats};
use mlcpcm::constellation::Constellation;
use mlcpcm::construction::{construct_rf1, construct_rf2, RankSequence};
use mlcpcm::polar::{crc16, crc_attach, crc_check, polar_encode, polar_transform};
use mlcpcm::Bit;
use proptest::prelude::*;

fn bits(max_len: usize) -> impl Strategy<Value = Vec<Bit>> {
    prop::collection::vec(0u8..2, 0..=max_len)
}

fn polar_input() -> impl Strategy<Value = Vec<Bit>> {
    (1u32..=10).prop_flat_map(|log_n| prop::collection::vec(0u8..2, 1usize << log_n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn encoder_is_an_involution(u in polar_input()) {
        let x = polar_encode(&u).unwrap();
        prop_assert_eq!(polar_encode(&x).unwrap(), u);
    }

    #[test]
    fn crc_round_trip_and_single_flip(payload in bits(200), flip in any::<prop::sample::Index>()) {
        let mut word = crc_attach(&payload);
        prop_assert_eq!(word.len(), payload.len() + 16);
        prop_assert!(crc_check(&word));
        let i = flip.index(word.len());
        word[i] ^= 1;
        prop_assert!(!crc_check(&word));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn crc_matches_xmodem_reference(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let reference = crc::Crc::<u16>::new(&crc::CRC_16_XMODEM).checksum(&bytes);
        let as_bits: Vec<Bit> = bytes.iter().flat_map(|b| (0..8).rev().map(move |j| (b >> j) & 1)).collect();
        prop_assert_eq!(crc16(&as_bits), reference);
    }

    #[test]
    fn transform_is_linear(a in prop::collection::vec(0u8..2, 64), b in prop::collection::vec(0u8..2, 64)) {
        let sum: Vec<Bit> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let (mut xa, mut xb, mut xs) = (a.clone(), b.clone(), sum);
        polar_transform(&mut xa);
        polar_transform(&mut xb);
        polar_transform(&mut xs);
        let combined: Vec<Bit> = xa.iter().zip(&xb).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(xs, combined);
    }

    #[test]
    fn rate_filling_places_exactly_k_bits(
        m in prop::sample::select(vec![1usize, 2, 4, 6, 8]),
        log_n in 3u32..=9,
        frac in 0.0f64..=1.0,
    ) {
        let n = 1usize << log_n;
        let k = ((m * n) as f64 * frac).round() as usize;
        let seq = RankSequence::five_g();
        for cons in [construct_rf1(m, k, n, &seq).unwrap(), construct_rf2(m, k, n, 0.1, &seq).unwrap()] {
            prop_assert_eq!(cons.levels.iter().map(|l| l.info_set.len()).sum::<usize>(), k);
            for level in &cons.levels {
                prop_assert!(level.info_set.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(level.info_set.iter().all(|&i| i < n));
            }
        }
    }

    #[test]
    fn finite_rate_never_exceeds_capacity(
        cap in 0.0f64..1.0,
        disp in 0.0f64..2.0,
        n in 1usize..5000,
        eps in 1e-6f64..0.5,
    ) {
        prop_assert!(finite_bl_rate(cap, disp, n, eps).unwrap() <= cap);
    }
}

#[test]
fn rank_sequences_are_nested_permutations() {
    let five_g = RankSequence::five_g();
    for log_n in 1..=10 {
        let n = 1usize << log_n;
        for seq in [five_g.clone(), RankSequence::polarization_weight(n).unwrap()] {
            let order = seq.restrict(n).unwrap();
            let mut sorted = order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            // the restricted order keeps the relative order of the full sequence
            let full: Vec<usize> = seq.order().iter().copied().filter(|&i| i < n).collect();
            assert_eq!(order, full);
            let mut previous: Vec<usize> = Vec::new();
            for k in 0..=n {
                let set = seq.most_reliable(n, k).unwrap();
                assert_eq!(set.len(), k);
                assert!(previous.iter().all(|i| set.binary_search(i).is_ok()), "n={n} k={k}");
                previous = set;
            }
        }
    }
    // the 5G sequence nests across lengths: order for n/2 is a subsequence of order for n
    for log_n in 2..=10 {
        let n = 1usize << log_n;
        let small = five_g.restrict(n / 2).unwrap();
        let big: Vec<usize> = five_g.restrict(n).unwrap().into_iter().filter(|&i| i < n / 2).collect();
        assert_eq!(small, big);
    }
}

#[test]
fn capacity_and_dispersion_monotonicity_and_limits() {
    let grid: Vec<f64> = (-20..=40).map(|s| s as f64).collect();
    for m in [1, 2, 4, 6, 8] {
        let c = Constellation::with_order(m).unwrap();
        let mut previous = vec![-1.0; m];
        let mut previous_total = -1.0;
        for &snr in &grid {
            let stats = level_stats(&c, snr);
            for (k, s) in stats.iter().enumerate() {
                assert!((0.0..=1.0).contains(&s.capacity));
                assert!(s.dispersion >= 0.0);
                assert!(s.capacity >= previous[k] - 1e-12, "m={m} level {} at {snr} dB", k + 1);
                previous[k] = s.capacity;
            }
            let total = channel_capacity(&c, snr);
            assert!(total >= previous_total - 1e-12);
            assert!((-1e-12..=m as f64 + 1e-12).contains(&total), "m={m} at {snr} dB: {total}");
            previous_total = total;
        }
        for s in level_stats(&c, 60.0) {
            assert!((s.capacity - 1.0).abs() < 1e-6 && s.dispersion < 1e-5);
        }
        assert!((channel_capacity(&c, 60.0) - m as f64).abs() < 1e-6);
    }
}

