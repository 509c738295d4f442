//! Multilevel transmitter and multistage receiver.
//!
//! Level `k` carries one polar codeword `v_k` of length `N`; symbol `i` is the
//! constellation point labelled `(v_1[i], .., v_m[i])`. The receiver decodes
//! level by level and feeds re-encoded codeword bits forward as the prefix of
//! the next level's demapper.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::construction::CodeConstruction;
use crate::error::invalid;
use crate::polar::{ComponentCode, ListDecoder};
use crate::{Bit, Error, Result};

/// Constellation plus one component code per level.
#[derive(Debug, Clone, PartialEq)]
pub struct MlcScheme {
    constellation: Constellation,
    codes: Vec<ComponentCode>,
}

impl MlcScheme {
    pub fn new(constellation: Constellation, construction: &CodeConstruction) -> Result<Self> {
        if construction.m != constellation.order() {
            return invalid(format!(
                "construction has {} levels, constellation {}",
                construction.m,
                constellation.order()
            ));
        }
        let codes = construction
            .levels
            .iter()
            .map(|l| ComponentCode::new(construction.n, l.info_set.clone(), l.crc_len))
            .collect::<Result<Vec<_>>>()?;
        Self::from_codes(constellation, codes)
    }

    pub fn from_codes(constellation: Constellation, codes: Vec<ComponentCode>) -> Result<Self> {
        if codes.len() != constellation.order() {
            return Err(Error::LengthMismatch {
                expected: constellation.order(),
                actual: codes.len(),
            });
        }
        if codes.iter().any(|c| c.n() != codes[0].n()) {
            return invalid("component codes differ in length");
        }
        Ok(Self {
            constellation,
            codes,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn codes(&self) -> &[ComponentCode] {
        &self.codes
    }

    pub fn levels(&self) -> usize {
        self.codes.len()
    }

    /// Symbols per frame.
    pub fn n(&self) -> usize {
        self.codes[0].n()
    }

    pub fn payload_lens(&self) -> Vec<usize> {
        self.codes.iter().map(ComponentCode::payload_len).collect()
    }

    /// Payload bits per frame, CRC excluded.
    pub fn payload_bits(&self) -> usize {
        self.codes.iter().map(ComponentCode::payload_len).sum()
    }

    pub fn encode(&self, payloads: &[Vec<Bit>]) -> Result<MlcFrame> {
        if payloads.len() != self.levels() {
            return Err(Error::LengthMismatch {
                expected: self.levels(),
                actual: payloads.len(),
            });
        }
        let rows = self
            .codes
            .iter()
            .zip(payloads)
            .map(|(code, p)| code.encode(p))
            .collect::<Result<Vec<_>>>()?;
        let symbols = (0..self.n())
            .map(|i| {
                let label = rows.iter().fold(0usize, |acc, row| (acc << 1) | row[i] as usize);
                self.constellation.point(label)
            })
            .collect();
        Ok(MlcFrame {
            payloads: payloads.to_vec(),
            rows,
            symbols,
        })
    }
}

/// One transmitted frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlcFrame {
    pub payloads: Vec<Vec<Bit>>,
    /// Codeword `v_k` of every level.
    pub rows: Vec<Vec<Bit>>,
    pub symbols: Vec<Complex64>,
}

/// Receiver output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MsdOutput {
    pub payloads: Vec<Vec<Bit>>,
    /// Re-encoded codeword decisions `v̂_k`.
    pub rows: Vec<Vec<Bit>>,
    pub crc_ok: Vec<bool>,
    /// Level LLRs handed to each component decoder.
    pub llrs: Vec<Vec<f64>>,
}

impl MsdOutput {
    /// Every level passed its CRC (levels without CRC count as passing).
    pub fn frame_ok(&self) -> bool {
        self.crc_ok.iter().all(|&ok| ok)
    }

    /// Per-level payload errors against the transmitted payloads.
    pub fn level_errors(&self, sent: &[Vec<Bit>]) -> Vec<bool> {
        self.payloads.iter().zip(sent).map(|(a, b)| a != b).collect()
    }

    /// Whether any level's payload differs from `sent`.
    pub fn frame_error(&self, sent: &[Vec<Bit>]) -> bool {
        self.level_errors(sent).into_iter().any(|e| e)
    }
}

/// Multistage decoder with reusable list-decoder buffers.
#[derive(Debug, Clone)]
pub struct MultistageDecoder {
    list: ListDecoder,
    prefix: Vec<usize>,
}

impl MultistageDecoder {
    pub fn new(n: usize, list_size: usize) -> Self {
        Self {
            list: ListDecoder::new(n, list_size),
            prefix: vec![0; n],
        }
    }

    pub fn list_size(&self) -> usize {
        self.list.list_size()
    }

    /// Decodes `y` observed with complex noise variance `noise_var`.
    pub fn decode(&mut self, scheme: &MlcScheme, y: &[Complex64], noise_var: f64) -> Result<MsdOutput> {
        self.decode_with(scheme, y, noise_var, |_, _| {})
    }

    /// As [`decode`](Self::decode); `feedback(k, row)` may rewrite the level-`k`
    /// decision (0-based) before it conditions later levels.
    pub fn decode_with(
        &mut self,
        scheme: &MlcScheme,
        y: &[Complex64],
        noise_var: f64,
        mut feedback: impl FnMut(usize, &mut Vec<Bit>),
    ) -> Result<MsdOutput> {
        let n = scheme.n();
        if y.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if self.list.n() != n {
            return invalid(format!("decoder built for length {}, frame has {n}", self.list.n()));
        }
        self.prefix.iter_mut().for_each(|p| *p = 0);
        let mut out = MsdOutput {
            payloads: Vec::with_capacity(scheme.levels()),
            rows: Vec::with_capacity(scheme.levels()),
            crc_ok: Vec::with_capacity(scheme.levels()),
            llrs: Vec::with_capacity(scheme.levels()),
        };
        let c = scheme.constellation();
        for (k, code) in scheme.codes().iter().enumerate() {
            let llrs: Vec<f64> = y
                .iter()
                .zip(&self.prefix)
                .map(|(&yi, &p)| c.level_llr_raw(yi, noise_var, k + 1, p))
                .collect();
            let decoded = self.list.decode(&llrs, code);
            let mut row = decoded.codeword;
            feedback(k, &mut row);
            for (p, &b) in self.prefix.iter_mut().zip(&row) {
                *p = (*p << 1) | b as usize;
            }
            out.payloads.push(decoded.payload);
            out.crc_ok.push(decoded.crc_ok);
            out.rows.push(row);
            out.llrs.push(llrs);
        }
        Ok(out)
    }
}

/// Encodes one frame for `construction` on `c`.
pub fn mlc_encode(payloads: &[Vec<Bit>], construction: &CodeConstruction, c: &Constellation) -> Result<Vec<Complex64>> {
    Ok(MlcScheme::new(c.clone(), construction)?.encode(payloads)?.symbols)
}

/// Multistage decoding of one frame with a fresh decoder.
pub fn multistage_decode(
    y: &[Complex64],
    noise_var: f64,
    construction: &CodeConstruction,
    c: &Constellation,
    list_size: usize,
) -> Result<MsdOutput> {
    let scheme = MlcScheme::new(c.clone(), construction)?;
    MultistageDecoder::new(scheme.n(), list_size).decode(&scheme, y, noise_var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{construct_rf1, RankSequence};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_payloads(scheme: &MlcScheme, rng: &mut ChaCha8Rng) -> Vec<Vec<Bit>> {
        scheme
            .payload_lens()
            .iter()
            .map(|&len| (0..len).map(|_| rng.gen_range(0..2)).collect())
            .collect()
    }

    #[test]
    fn qpsk_hand_trace() {
        let codes = vec![
            ComponentCode::new(4, vec![3], 0).unwrap(),
            ComponentCode::new(4, vec![2, 3], 0).unwrap(),
        ];
        let scheme = MlcScheme::from_codes(Constellation::qam(2).unwrap(), codes).unwrap();
        let frame = scheme.encode(&[vec![1], vec![1, 0]]).unwrap();
        assert_eq!(frame.rows, vec![vec![1, 1, 1, 1], vec![1, 0, 1, 0]]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [(-s, -s), (-s, s), (-s, -s), (-s, s)];
        for (got, want) in frame.symbols.iter().zip(expect) {
            assert!((got.re - want.0).abs() < 1e-15 && (got.im - want.1).abs() < 1e-15);
        }
    }

    #[test]
    fn all_zero_payloads_map_to_label_zero() {
        let seq = RankSequence::five_g();
        let cons = construct_rf1(4, 512, 256, &seq).unwrap();
        let scheme = MlcScheme::new(Constellation::qam(4).unwrap(), &cons).unwrap();
        let zeros: Vec<Vec<Bit>> = scheme.payload_lens().iter().map(|&l| vec![0; l]).collect();
        let frame = scheme.encode(&zeros).unwrap();
        let origin = scheme.constellation().point(0);
        assert!(frame.symbols.iter().all(|&x| x == origin));
    }

    #[test]
    fn noiseless_round_trip() {
        let seq = RankSequence::five_g();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [2, 4, 6, 8] {
            for n in [64, 256] {
                let k = m * n / 2 + 3;
                let cons = construct_rf1(m, k, n, &seq).unwrap();
                let scheme = MlcScheme::new(Constellation::qam(m).unwrap(), &cons).unwrap();
                let payloads = random_payloads(&scheme, &mut rng);
                let frame = scheme.encode(&payloads).unwrap();
                let out = MultistageDecoder::new(n, 4).decode(&scheme, &frame.symbols, 1e-12).unwrap();
                assert_eq!(out.payloads, payloads, "m = {m}, n = {n}");
                assert_eq!(out.rows, frame.rows);
                assert!(out.frame_ok());
            }
        }
    }

    #[test]
    fn qpsk_first_level_uses_in_phase_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let seq = RankSequence::five_g();
        let cons = construct_rf1(2, 64, 64, &seq).unwrap();
        let scheme = MlcScheme::new(Constellation::qam(2).unwrap(), &cons).unwrap();
        let payloads = random_payloads(&scheme, &mut rng);
        let frame = scheme.encode(&payloads).unwrap();
        let nv = 0.5;
        let y: Vec<Complex64> = frame
            .symbols
            .iter()
            .map(|x| x + Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let out = MultistageDecoder::new(64, 2).decode(&scheme, &y, nv).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        for (yi, &llr) in y.iter().zip(&out.llrs[0]) {
            assert!((llr - 4.0 * a * yi.re / nv).abs() < 1e-9);
        }
    }

    #[test]
    fn wrong_feedback_only_affects_later_levels() {
        let seq = RankSequence::five_g();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cons = construct_rf1(6, 300, 64, &seq).unwrap();
        let scheme = MlcScheme::new(Constellation::qam(6).unwrap(), &cons).unwrap();
        let payloads = random_payloads(&scheme, &mut rng);
        let frame = scheme.encode(&payloads).unwrap();
        let mut dec = MultistageDecoder::new(64, 4);
        let clean = dec.decode(&scheme, &frame.symbols, 1e-3).unwrap();
        for k in 0..6 {
            let hurt = dec
                .decode_with(&scheme, &frame.symbols, 1e-3, |level, row| {
                    if level == k {
                        row.iter_mut().for_each(|b| *b ^= 1);
                    }
                })
                .unwrap();
            assert_eq!(hurt.llrs[..=k], clean.llrs[..=k]);
            assert_eq!(hurt.payloads[..=k], clean.payloads[..=k]);
            // odd levels ride on the in-phase axis, even levels on quadrature
            if k + 2 < 6 {
                assert_ne!(hurt.llrs[k + 2], clean.llrs[k + 2]);
            }
        }
    }
}
