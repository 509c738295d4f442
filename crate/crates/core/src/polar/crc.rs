//! The 5G `gCRC16` code: `D^16 + D^12 + D^5 + 1`, zero initial state,
//! bits processed MSB first, parity appended after the payload.

use crate::Bit;

pub const CRC16_POLY: u16 = 0x1021;
pub const CRC16_LEN: usize = 16;

/// CRC register after shifting in `bits`.
pub fn crc16(bits: &[Bit]) -> u16 {
    let mut reg: u16 = 0;
    for &b in bits {
        let feedback = ((reg >> 15) as u8 ^ (b & 1)) != 0;
        reg <<= 1;
        if feedback {
            reg ^= CRC16_POLY;
        }
    }
    reg
}

/// `payload` followed by its 16 parity bits.
pub fn crc_attach(payload: &[Bit]) -> Vec<Bit> {
    let parity = crc16(payload);
    let mut out = Vec::with_capacity(payload.len() + CRC16_LEN);
    out.extend_from_slice(payload);
    out.extend((0..CRC16_LEN).rev().map(|i| ((parity >> i) & 1) as Bit));
    out
}

/// True when the trailing 16 bits are the CRC of the rest.
pub fn crc_check(bits: &[Bit]) -> bool {
    bits.len() >= CRC16_LEN && crc16(bits) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes_to_bits(data: &[u8]) -> Vec<Bit> {
        data.iter()
            .flat_map(|byte| (0..8).rev().map(move |i| (byte >> i) & 1))
            .collect()
    }

    #[test]
    fn check_value() {
        assert_eq!(crc16(&bytes_to_bits(b"123456789")), 0x31C3);
    }

    #[test]
    fn attach_then_check() {
        let payload = bytes_to_bits(b"polar");
        let word = crc_attach(&payload);
        assert_eq!(word.len(), payload.len() + 16);
        assert!(crc_check(&word));
        assert!(crc_check(&crc_attach(&[])));
        assert!(!crc_check(&[0, 1, 1]));
        for i in 0..word.len() {
            let mut bad = word.clone();
            bad[i] ^= 1;
            assert!(!crc_check(&bad), "flip at {i}");
        }
    }
}
