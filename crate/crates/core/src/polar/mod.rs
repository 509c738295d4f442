//! Binary polar codes: encoder, CRC and list decoding.

mod crc;
mod list;

use serde::{Deserialize, Serialize};

pub use crc::{crc16, crc_attach, crc_check, CRC16_LEN, CRC16_POLY};
pub use list::{sc_decode, ListDecoder, ListOutput};

use crate::error::{invalid, Error, Result};
use crate::Bit;

/// `x = u F^{⊗n}` over GF(2), in place.
pub fn polar_transform(bits: &mut [Bit]) {
    let n = bits.len();
    let mut span = 1;
    while span < n {
        for block in bits.chunks_mut(2 * span) {
            let (upper, lower) = block.split_at_mut(span);
            for (a, b) in upper.iter_mut().zip(lower.iter()) {
                *a ^= *b;
            }
        }
        span *= 2;
    }
}

/// Encodes `u` with the polar transform; its length must be a power of two.
pub fn polar_encode(u: &[Bit]) -> Result<Vec<Bit>> {
    if u.is_empty() || !u.len().is_power_of_two() {
        return invalid(format!("polar length {} is not a power of two", u.len()));
    }
    let mut x = u.to_vec();
    polar_transform(&mut x);
    Ok(x)
}

/// A length-`n` polar code with an information set and optional CRC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCode {
    n: usize,
    info_set: Vec<usize>,
    crc_len: usize,
    frozen: Vec<bool>,
}

impl ComponentCode {
    pub fn new(n: usize, mut info_set: Vec<usize>, crc_len: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return invalid(format!("polar length {n} is not a power of two"));
        }
        info_set.sort_unstable();
        info_set.dedup();
        if info_set.last().is_some_and(|&i| i >= n) {
            return invalid("information index out of range");
        }
        if crc_len != 0 && crc_len != CRC16_LEN {
            return invalid(format!("unsupported CRC length {crc_len}"));
        }
        if crc_len > info_set.len() {
            return invalid("CRC longer than the information set");
        }
        let mut frozen = vec![true; n];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(Self {
            n,
            info_set,
            crc_len,
            frozen,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn crc_len(&self) -> usize {
        self.crc_len
    }

    pub fn payload_len(&self) -> usize {
        self.info_set.len() - self.crc_len
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub(crate) fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    /// Places payload (plus CRC) on the information set, zeros elsewhere.
    pub fn build_u(&self, payload: &[Bit]) -> Result<Vec<Bit>> {
        if payload.len() != self.payload_len() {
            return Err(Error::LengthMismatch {
                expected: self.payload_len(),
                actual: payload.len(),
            });
        }
        let info = if self.crc_len > 0 {
            crc_attach(payload)
        } else {
            payload.to_vec()
        };
        let mut u = vec![0; self.n];
        for (&i, &b) in self.info_set.iter().zip(&info) {
            u[i] = b & 1;
        }
        Ok(u)
    }

    /// Codeword for `payload`.
    pub fn encode(&self, payload: &[Bit]) -> Result<Vec<Bit>> {
        let mut x = self.build_u(payload)?;
        polar_transform(&mut x);
        Ok(x)
    }

    /// Information bits of `u`, in index order (payload then CRC).
    pub fn extract_info(&self, u: &[Bit]) -> Vec<Bit> {
        self.info_set.iter().map(|&i| u[i]).collect()
    }
}
