//! Pseudo-random and synchronization sequences: the length-31 Gold sequence,
//! PSS/SSS m-sequences and the PBCH DMRS.

use num_complex::Complex64;

use super::CellIdentity;
use crate::error::{Error, Result};

pub const SYNC_SEQ_LEN: usize = 127;
pub const DMRS_LEN: usize = 144;

const GOLD_NC: usize = 1600;

/// Length-31 Gold sequence c(n), n in 0..len, for the given c_init.
pub fn gold_sequence(c_init: u32, len: usize) -> Vec<u8> {
    let total = GOLD_NC + len;
    let mut x1 = vec![0u8; total + 31];
    let mut x2 = vec![0u8; total + 31];
    x1[0] = 1;
    for (i, x) in x2.iter_mut().take(31).enumerate() {
        *x = ((c_init >> i) & 1) as u8;
    }
    for n in 0..total {
        x1[n + 31] = x1[n + 3] ^ x1[n];
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n];
    }
    (0..len)
        .map(|n| x1[n + GOLD_NC] ^ x2[n + GOLD_NC])
        .collect()
}

fn m_sequence(init: [u8; 7], taps: &[usize]) -> [u8; SYNC_SEQ_LEN] {
    let mut x = [0u8; SYNC_SEQ_LEN];
    x[..7].copy_from_slice(&init);
    for i in 0..SYNC_SEQ_LEN - 7 {
        x[i + 7] = taps.iter().fold(0, |acc, &t| acc ^ x[i + t]);
    }
    x
}

/// PSS d(n) in {+1, -1} for N_ID^(2) in 0..=2.
pub fn gen_pss(n_id_2: u8) -> Result<Vec<f64>> {
    if n_id_2 > 2 {
        return Err(Error::field("n_id_2", format!("{n_id_2} > 2")));
    }
    let x = m_sequence([0, 1, 1, 0, 1, 1, 1], &[0, 4]);
    Ok((0..SYNC_SEQ_LEN)
        .map(|n| 1.0 - 2.0 * f64::from(x[(n + 43 * n_id_2 as usize) % SYNC_SEQ_LEN]))
        .collect())
}

/// SSS d(n) in {+1, -1} for a physical cell identity.
pub fn gen_sss(cell: CellIdentity) -> Vec<f64> {
    let x0 = m_sequence([1, 0, 0, 0, 0, 0, 0], &[0, 4]);
    let x1 = m_sequence([1, 0, 0, 0, 0, 0, 0], &[0, 1]);
    let n1 = cell.n_id_1() as usize;
    let n2 = cell.n_id_2() as usize;
    let m0 = 15 * (n1 / 112) + 5 * n2;
    let m1 = n1 % 112;
    (0..SYNC_SEQ_LEN)
        .map(|n| {
            let a = 1.0 - 2.0 * f64::from(x0[(n + m0) % SYNC_SEQ_LEN]);
            let b = 1.0 - 2.0 * f64::from(x1[(n + m1) % SYNC_SEQ_LEN]);
            a * b
        })
        .collect()
}

/// DMRS index i-bar for L_max = 4: SSB index plus 4 for the second half frame.
pub fn dmrs_index(issb: u8, half_frame: bool) -> u8 {
    (issb & 0x3) + if half_frame { 4 } else { 0 }
}

/// PBCH DMRS QPSK sequence (144 symbols) for cell and i-bar in 0..=7.
pub fn gen_dmrs_ibar(cell: CellIdentity, ibar: u8) -> Result<Vec<Complex64>> {
    if ibar > 7 {
        return Err(Error::field("ibar", format!("{ibar} > 7")));
    }
    let n = u32::from(cell.id());
    let i = u32::from(ibar) + 1;
    let c_init = (1 << 11) * i * (n / 4 + 1) + (1 << 6) * i + (n % 4);
    let c = gold_sequence(c_init, 2 * DMRS_LEN);
    Ok(super::qpsk::map_pairs(&c))
}

/// PBCH DMRS for an SSB index (0..=3) and half frame.
pub fn gen_dmrs(cell: CellIdentity, issb: u8, half_frame: bool) -> Result<Vec<Complex64>> {
    if issb > 3 {
        return Err(Error::field("issb", format!("{issb} > 3")));
    }
    gen_dmrs_ibar(cell, dmrs_index(issb, half_frame))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_from_hex(hex: &str, len: usize) -> Vec<u8> {
        hex.chars()
            .flat_map(|c| {
                let v = c.to_digit(16).unwrap();
                (0..4).rev().map(move |i| ((v >> i) & 1) as u8)
            })
            .take(len)
            .collect()
    }

    #[test]
    fn pss_reference_values() {
        let expect = "0110111100111001010110011000001101101011101000110010001000000100100110100111101110000111111100011101100010100101111101010100001";
        let pss = gen_pss(0).unwrap();
        let got: String = pss.iter().map(|&v| if v < 0.0 { '1' } else { '0' }).collect();
        assert_eq!(got, expect);
        let pss2 = gen_pss(2).unwrap();
        let head = [-1., -1., -1., -1., -1., -1., 1., 1., 1., -1., -1., -1., 1., -1., -1., 1.];
        assert_eq!(&pss2[..16], &head);
    }

    #[test]
    fn sss_reference_values() {
        for (id, hex) in [
            (321u16, "4d8d66f19d31b81a035fed8a1743e52a"),
            (1007, "bc96fc56a3e5bab48b56836f225e8840"),
        ] {
            let sss = gen_sss(CellIdentity::new(id).unwrap());
            let bits: Vec<u8> = sss.iter().map(|&v| u8::from(v < 0.0)).collect();
            assert_eq!(bits, bits_from_hex(hex, 127), "cell {id}");
        }
    }

    #[test]
    fn gold_reference_values() {
        assert_eq!(gold_sequence(321, 32), bits_from_hex("99981b76", 32));
    }

    #[test]
    fn dmrs_reference_values() {
        let d = gen_dmrs_ibar(CellIdentity::new(321).unwrap(), 5).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [
            Complex64::new(s, s),
            Complex64::new(-s, -s),
            Complex64::new(-s, s),
            Complex64::new(s, s),
        ];
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(d.len(), DMRS_LEN);
        assert!(d.iter().all(|z| (z.norm_sqr() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pss_sequences_are_nearly_orthogonal() {
        // Subcarrier-domain inner products: 127 on the diagonal, -1 elsewhere.
        let seqs: Vec<Vec<f64>> = (0..3).map(|k| gen_pss(k).unwrap()).collect();
        for k in 0..3 {
            for j in 0..3 {
                let dot: f64 = seqs[k].iter().zip(&seqs[j]).map(|(a, b)| a * b).sum();
                if k == j {
                    assert_eq!(dot, 127.0);
                } else {
                    assert!(127.0 / dot.abs() > 4.0);
                }
            }
        }
    }

    #[test]
    fn index_validation() {
        assert!(gen_pss(3).is_err());
        assert!(gen_dmrs(CellIdentity::new(0).unwrap(), 4, false).is_err());
    }
}
