//! PBCH transport chain: payload interleaving, payload scrambling, CRC,
//! polar coding and the 864-bit scrambler, plus the inverse chain.

use serde::{Deserialize, Serialize};

use super::crc::{attach, crc_check, CRC_BITS};
use super::mib::{MibPayload, PAYLOAD_BITS};
use super::polar::PolarCode;
use super::qpsk::qpsk_modulate;
use super::sequence::gold_sequence;
use super::CellIdentity;
use crate::error::{check_len, Error, Result};
use num_complex::Complex64;

pub const CODED_BITS: usize = 864;
pub const DATA_SYMBOLS: usize = CODED_BITS / 2;
pub const BLOCK_BITS: usize = PAYLOAD_BITS + CRC_BITS;

/// Payload interleaver pattern G(j).
const G: [usize; 32] = [
    16, 23, 18, 17, 8, 30, 10, 6, 24, 7, 0, 5, 3, 2, 1, 4, 9, 11, 12, 13, 14, 15, 19, 20, 21, 22, 25,
    26, 27, 28, 29, 31,
];

/// Payload scrambling offset step for L_max = 4.
const PAYLOAD_SCRAMBLE_M: usize = PAYLOAD_BITS - 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PbchConfig {
    /// Full standard chain. When false the payload interleaver is bypassed.
    pub strict_standard: bool,
}

impl Default for PbchConfig {
    fn default() -> Self {
        Self {
            strict_standard: true,
        }
    }
}

/// Destination of each payload bit under the interleaver.
fn interleaver_map() -> [usize; 32] {
    let mut map = [0; 32];
    let (mut j_sfn, mut j_ssb, mut j_other) = (0, 11, 14);
    for (i, m) in map.iter_mut().enumerate() {
        *m = match i {
            1..=6 | 24..=27 => {
                j_sfn += 1;
                G[j_sfn - 1]
            }
            28 => G[10],
            29..=31 => {
                j_ssb += 1;
                G[j_ssb - 1]
            }
            _ => {
                j_other += 1;
                G[j_other - 1]
            }
        };
    }
    map
}

pub fn interleave_payload(a: &[u8]) -> Result<Vec<u8>> {
    check_len("payload", PAYLOAD_BITS, a.len())?;
    let mut out = vec![0; PAYLOAD_BITS];
    for (i, &m) in interleaver_map().iter().enumerate() {
        out[m] = a[i];
    }
    Ok(out)
}

pub fn deinterleave_payload(a: &[u8]) -> Result<Vec<u8>> {
    check_len("payload", PAYLOAD_BITS, a.len())?;
    Ok(interleaver_map().iter().map(|&m| a[m]).collect())
}

/// Scrambling offset index from the (interleaved) payload: SFN 3rd and 2nd LSBs.
fn payload_v(interleaved: &[u8]) -> usize {
    2 * usize::from(interleaved[G[7]]) + usize::from(interleaved[G[8]])
}

/// First scrambling, applied to the interleaved payload. Involutive.
pub fn scramble_payload(interleaved: &[u8], cell: CellIdentity) -> Result<Vec<u8>> {
    check_len("payload", PAYLOAD_BITS, interleaved.len())?;
    let v = payload_v(interleaved);
    let c = gold_sequence(u32::from(cell.id()), PAYLOAD_SCRAMBLE_M * 4);
    let mut j = 0;
    Ok(interleaved
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            if i == G[10] || i == G[7] || i == G[8] {
                b
            } else {
                j += 1;
                b ^ c[j - 1 + v * PAYLOAD_SCRAMBLE_M]
            }
        })
        .collect())
}

/// Gold scrambling of a coded block: `b ^ c(i + v * len)` with `c_init = n_cell_id`.
pub fn scramble(bits: &[u8], cell: CellIdentity, v: u8) -> Result<Vec<u8>> {
    if v > 3 {
        return Err(Error::field("v", format!("{v} > 3")));
    }
    let n = bits.len();
    let c = gold_sequence(u32::from(cell.id()), n * (usize::from(v) + 1));
    Ok(bits
        .iter()
        .zip(&c[usize::from(v) * n..])
        .map(|(b, s)| b ^ s)
        .collect())
}

/// Sign-flips LLRs where the scrambling sequence is one.
pub fn descramble_llr(llr: &[f64], cell: CellIdentity, v: u8) -> Result<Vec<f64>> {
    let zeros = vec![0u8; llr.len()];
    let c = scramble(&zeros, cell, v)?;
    Ok(llr
        .iter()
        .zip(c)
        .map(|(&l, s)| if s == 1 { -l } else { l })
        .collect())
}

/// Polar-encodes and rate-matches a CRC-protected 56-bit block to 864 bits.
pub fn pbch_encode(bits56: &[u8]) -> Result<Vec<u8>> {
    check_len("PBCH encoder input", BLOCK_BITS, bits56.len())?;
    PolarCode::pbch().encode(bits56)
}

/// SC-decodes 864 LLRs (positive = bit 0) back to 56 bits.
pub fn pbch_decode_block(llr: &[f64]) -> Result<Vec<u8>> {
    check_len("PBCH decoder input", CODED_BITS, llr.len())?;
    PolarCode::pbch().decode(llr)
}

/// Payload → 864 coded bits before the final scrambler.
pub fn bch_encode(payload: &[u8], cell: CellIdentity, cfg: PbchConfig) -> Result<Vec<u8>> {
    check_len("payload", PAYLOAD_BITS, payload.len())?;
    let a = if cfg.strict_standard {
        interleave_payload(payload)?
    } else {
        payload.to_vec()
    };
    let a = scramble_payload(&a, cell)?;
    pbch_encode(&attach(&a))
}

/// Full transmit chain for one SSB: payload bits, scrambled coded bits and symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PbchTx {
    pub payload: Vec<u8>,
    pub coded: Vec<u8>,
    pub symbols: Vec<Complex64>,
}

pub fn pbch_transmit(
    payload: &[u8],
    cell: CellIdentity,
    issb: u8,
    cfg: PbchConfig,
) -> Result<PbchTx> {
    let coded = scramble(&bch_encode(payload, cell, cfg)?, cell, issb & 0x3)?;
    let symbols = qpsk_modulate(&coded)?;
    Ok(PbchTx {
        payload: payload.to_vec(),
        coded,
        symbols,
    })
}

pub fn pbch_transmit_mib(
    mib: &MibPayload,
    cell: CellIdentity,
    issb: u8,
    cfg: PbchConfig,
) -> Result<PbchTx> {
    pbch_transmit(&mib.pack()?, cell, issb, cfg)
}

/// Result of decoding one PBCH.
#[derive(Debug, Clone, PartialEq)]
pub struct PbchDecoded {
    /// Recovered 32-bit payload (meaningful only when `crc_pass`).
    pub payload: Vec<u8>,
    pub crc_pass: bool,
}

impl PbchDecoded {
    pub fn mib(&self) -> Option<MibPayload> {
        if self.crc_pass {
            MibPayload::unpack(&self.payload).ok()
        } else {
            None
        }
    }
}

/// Inverse chain from channel LLRs of the 864 scrambled bits.
pub fn pbch_decode(
    llr: &[f64],
    cell: CellIdentity,
    issb: u8,
    cfg: PbchConfig,
) -> Result<PbchDecoded> {
    check_len("PBCH LLRs", CODED_BITS, llr.len())?;
    let d = descramble_llr(llr, cell, issb & 0x3)?;
    let block = pbch_decode_block(&d)?;
    let crc_pass = crc_check(&block);
    let a = scramble_payload(&block[..PAYLOAD_BITS], cell)?;
    let payload = if cfg.strict_standard {
        deinterleave_payload(&a)?
    } else {
        a
    };
    Ok(PbchDecoded { payload, crc_pass })
}

/// Hard-bit decoding path: bits are mapped to unit-magnitude LLRs.
pub fn pbch_decode_hard(
    bits: &[u8],
    cell: CellIdentity,
    issb: u8,
    cfg: PbchConfig,
) -> Result<PbchDecoded> {
    let llr: Vec<f64> = bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect();
    pbch_decode(&llr, cell, issb, cfg)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::nr::mib::{CellBarred, DmrsTypeAPosition, IntraFreqReselection, ScsCommon};

    fn hex_bits(hex: &str, len: usize) -> Vec<u8> {
        hex.chars()
            .flat_map(|c| {
                let v = c.to_digit(16).unwrap();
                (0..4).rev().map(move |i| ((v >> i) & 1) as u8)
            })
            .take(len)
            .collect()
    }

    fn cell(id: u16) -> CellIdentity {
        CellIdentity::new(id).unwrap()
    }

    fn bch(mib: MibPayload, id: u16) -> Vec<u8> {
        bch_encode(&mib.pack().unwrap(), cell(id), PbchConfig::default()).unwrap()
    }

    #[test]
    fn bch_reference_zero_payload() {
        let expect = hex_bits("1502ad10a2e0ae461af2165419a4a1b6bfa8150207baad10084aa2e0b0581af204ecae46bcfe1654b30e19a40b1ca1b6bfa807ba084a04ecb058bcfeb30e0b1c1502ad10a2e0ae461af2165419a4a1b6bfa8150207baad10084aa2e0b0581af204ecae46bcfe1654b30e19a4", 864);
        assert_eq!(bch(MibPayload::default(), 0), expect);
    }

    #[test]
    fn bch_reference_sfn_and_half_frame() {
        let mib = MibPayload {
            sfn: 10,
            half_frame: true,
            ..MibPayload::default()
        };
        let expect = hex_bits("9311d1900fd84d304d590fb1d1f9937893eea0ddd16fe25c0f273c144da67e954dcf7efc0f4e3c7dd106e2359387a0b4a022e2a33ceb7e037e6a3c82e2caa04b9311d1900fd84d304d590fb1d1f9937893eea0ddd16fe25c0f273c144da67e954dcf7efc0f4e3c7dd106e235", 864);
        assert_eq!(bch(mib, 321), expect);
    }

    #[test]
    fn bch_reference_populated_mib() {
        let mib = MibPayload {
            sfn: 720,
            scs_common: ScsCommon::Scs30or120,
            ssb_subcarrier_offset: 6,
            dmrs_type_a_position: DmrsTypeAPosition::Pos3,
            pdcch_config_sib1: 108,
            cell_barred: CellBarred::Barred,
            intra_freq_reselection: IntraFreqReselection::NotAllowed,
            ..MibPayload::default()
        };
        assert_eq!(
            &mib.pack().unwrap()[..24],
            &hex_bits("5b6b62", 24)[..],
            "MIB field order"
        );
        let expect = hex_bits("5ed567b6f12f6d1937b3ab853d1c047f62e95ed55b8a67b6cd13f12f0b8f37b351256d1997b9ab8501203d1c3843047f62e95b8acd1351250b8f97b9012038435ed567b6f12f6d1937b3ab853d1c047f62e95ed55b8a67b6cd13f12f0b8f37b351256d1997b9ab8501203d1c", 864);
        assert_eq!(bch(mib, 0), expect);
    }

    #[test]
    fn transmit_reference_symbols() {
        let mib = MibPayload {
            sfn: 10,
            half_frame: true,
            ..MibPayload::default()
        };
        let tx = pbch_transmit_mib(&mib, cell(321), 2, PbchConfig::default()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [(-s, -s), (s, s), (-s, s)];
        for (z, (re, im)) in tx.symbols.iter().zip(expect) {
            assert!((z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12);
        }
        assert_eq!(tx.symbols.len(), DATA_SYMBOLS);
    }

    #[test]
    fn interleaver_is_a_permutation() {
        let mut seen = [false; 32];
        for m in interleaver_map() {
            assert!(!seen[m]);
            seen[m] = true;
        }
        let a: Vec<u8> = (0..32).map(|i| (i % 3 == 0) as u8).collect();
        assert_eq!(deinterleave_payload(&interleave_payload(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn scramble_is_an_involution_and_exposes_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b: Vec<u8> = (0..CODED_BITS).map(|_| rng.random_range(0..2)).collect();
        for v in 0..4 {
            let s = scramble(&b, cell(17), v).unwrap();
            assert_eq!(scramble(&s, cell(17), v).unwrap(), b);
            let zero = scramble(&[0; CODED_BITS], cell(17), v).unwrap();
            let direct = gold_sequence(17, CODED_BITS * (usize::from(v) + 1));
            assert_eq!(zero[..], direct[usize::from(v) * CODED_BITS..]);
        }
        assert!(scramble(&b, cell(17), 4).is_err());
    }

    #[test]
    fn distinct_cells_scramble_differently() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = rng.random_range(0..=1007u16);
            let mut b = rng.random_range(0..=1007u16);
            if a == b {
                b = (b + 1) % 1008;
            }
            let sa = scramble(&[0; CODED_BITS], cell(a), 0).unwrap();
            let sb = scramble(&[0; CODED_BITS], cell(b), 0).unwrap();
            assert!(sa.iter().zip(&sb).any(|(x, y)| x != y));
        }
    }

    #[test]
    fn payload_scrambling_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
            let c = cell(rng.random_range(0..=1007));
            let s = scramble_payload(&a, c).unwrap();
            assert_eq!(scramble_payload(&s, c).unwrap(), a);
        }
    }

    #[test]
    fn encoder_is_pure_and_sized() {
        let b: Vec<u8> = (0..56).map(|i| (i % 5 == 1) as u8).collect();
        let x = pbch_encode(&b).unwrap();
        assert_eq!(x.len(), CODED_BITS);
        assert_eq!(x, pbch_encode(&b).unwrap());
        assert!(pbch_encode(&b[..40]).is_err());
    }

    #[test]
    fn noiseless_chain_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for strict in [true, false] {
            let cfg = PbchConfig {
                strict_standard: strict,
            };
            for _ in 0..100 {
                let mib = MibPayload::random(&mut rng);
                let c = cell(rng.random_range(0..=1007));
                let issb = rng.random_range(0..4);
                let tx = pbch_transmit_mib(&mib, c, issb, cfg).unwrap();
                let dec = pbch_decode_hard(&tx.coded, c, issb, cfg).unwrap();
                assert!(dec.crc_pass);
                assert_eq!(dec.mib(), Some(mib));
            }
        }
    }

    #[test]
    fn random_llrs_fail_crc() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut passes = 0;
        for _ in 0..2000 {
            let llr: Vec<f64> = (0..CODED_BITS).map(|_| rng.random_range(-1.0..1.0)).collect();
            passes += usize::from(pbch_decode(&llr, cell(5), 0, PbchConfig::default()).unwrap().crc_pass);
        }
        assert_eq!(passes, 0);
    }
}
