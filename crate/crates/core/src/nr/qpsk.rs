//! QPSK mapping: (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn map_pairs(bits: &[u8]) -> Vec<Complex64> {
    bits.chunks_exact(2)
        .map(|p| {
            Complex64::new(
                FRAC_1_SQRT_2 * (1.0 - 2.0 * f64::from(p[0])),
                FRAC_1_SQRT_2 * (1.0 - 2.0 * f64::from(p[1])),
            )
        })
        .collect()
}

pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    Ok(map_pairs(bits))
}

/// Sign-based hard decisions; a zero component decides 0.
pub fn qpsk_demod_hard(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [u8::from(s.re < 0.0), u8::from(s.im < 0.0)])
        .collect()
}

/// Max-log LLRs, positive for bit 0: 2*sqrt(2)*x / noise_var.
pub fn qpsk_llr(symbols: &[Complex64], noise_var: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::SQRT_2 / noise_var.max(1e-12);
    symbols
        .iter()
        .flat_map(|s| [scale * s.re, scale * s.im])
        .collect()
}
