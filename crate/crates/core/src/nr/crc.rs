//! CRC-24C, the PBCH transport block CRC.

use crate::error::{check_len, Result};

/// g(D) = D^24 + D^23 + D^21 + D^20 + D^17 + D^15 + D^13 + D^12 + D^8 + D^4 + D^2 + D + 1
pub const CRC24C_POLY: u32 = 0x1B2_B117;
pub const CRC_BITS: usize = 24;

/// Shift-register CRC over a bit slice, zero initial register.
pub fn crc24c(bits: &[u8]) -> u32 {
    let mut reg = 0u32;
    for &bit in bits {
        let feedback = ((reg >> 23) & 1) ^ u32::from(bit & 1);
        reg = (reg << 1) & 0xFF_FFFF;
        if feedback == 1 {
            reg ^= CRC24C_POLY & 0xFF_FFFF;
        }
    }
    reg
}

/// Appends 24 parity bits to a 32-bit payload.
pub fn attach_crc24(payload: &[u8]) -> Result<Vec<u8>> {
    check_len("CRC payload", super::mib::PAYLOAD_BITS, payload.len())?;
    Ok(attach(payload))
}

pub(crate) fn attach(payload: &[u8]) -> Vec<u8> {
    let crc = crc24c(payload);
    let mut out = payload.to_vec();
    out.extend((0..CRC_BITS).rev().map(|i| ((crc >> i) & 1) as u8));
    out
}

/// True when the trailing 24 bits are the CRC of the leading bits.
pub fn crc_check(bits: &[u8]) -> bool {
    bits.len() > CRC_BITS && crc24c(bits) == 0
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Polynomial long division over GF(2) on explicit bit vectors.
    fn long_division_parity(payload: &[u8]) -> Vec<u8> {
        let gen: Vec<u8> = (0..=24).rev().map(|i| ((CRC24C_POLY >> i) & 1) as u8).collect();
        let mut work = payload.to_vec();
        work.extend(std::iter::repeat_n(0, 24));
        for i in 0..payload.len() {
            if work[i] == 1 {
                for (j, g) in gen.iter().enumerate() {
                    work[i + j] ^= g;
                }
            }
        }
        work[payload.len()..].to_vec()
    }

    #[test]
    fn zero_payload_has_zero_parity() {
        let out = attach_crc24(&[0; 32]).unwrap();
        assert_eq!(out.len(), 56);
        assert!(out[32..].iter().all(|&b| b == 0));
        assert_eq!(long_division_parity(&[0; 32]), vec![0; 24]);
    }

    #[test]
    fn matches_long_division() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
            assert_eq!(attach_crc24(&p).unwrap()[32..], long_division_parity(&p)[..]);
        }
    }

    #[test]
    fn reference_vector() {
        // Parity of [1,0,1,1,0,0,1,0] x 4 from an independent 5G NR toolbox.
        let p: Vec<u8> = [1, 0, 1, 1, 0, 0, 1, 0].repeat(4);
        assert_eq!(crc24c(&p), 0xf17f0d);
    }

    #[test]
    fn every_single_bit_error_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
        let cw = attach_crc24(&p).unwrap();
        assert!(crc_check(&cw));
        for pos in 0..56 {
            let mut bad = cw.clone();
            bad[pos] ^= 1;
            assert!(!crc_check(&bad), "flip at {pos} undetected");
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(attach_crc24(&[0; 31]).is_err());
    }
}
