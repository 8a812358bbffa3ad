//! CP-OFDM modulation of the SSB grid (normal cyclic prefix, unitary FFT).

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::grid::{SsbGrid, SSB_SUBCARRIERS, SSB_SYMBOLS};
use crate::error::{Error, Result};
use crate::frame::IqFrame;

pub const SCS_HZ: f64 = 15_000.0;
pub const SYMBOLS_PER_SLOT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfdmConfig {
    pub fft_size: usize,
    pub scs_hz: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            fft_size: 256,
            scs_hz: SCS_HZ,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 256 {
            return Err(Error::FftTooSmall {
                fft_size: self.fft_size,
                needed: 256,
            });
        }
        if !self.fft_size.is_multiple_of(128) {
            return Err(Error::Config(format!(
                "fft_size {} must be a multiple of 128 for integer CP lengths",
                self.fft_size
            )));
        }
        if self.scs_hz != SCS_HZ {
            return Err(Error::Config(format!("only 15 kHz SCS is supported, got {}", self.scs_hz)));
        }
        Ok(())
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.fft_size as f64 * self.scs_hz
    }

    /// Cyclic prefix length of slot symbol `l` (longer on the first symbol of
    /// each half subframe).
    pub fn cp_len(&self, l: usize) -> usize {
        if l.is_multiple_of(7) {
            self.fft_size * 160 / 2048
        } else {
            self.fft_size * 144 / 2048
        }
    }

    /// Start sample (CP included) of symbol `l` counted from symbol 0 of slot 0.
    pub fn symbol_start(&self, l: usize) -> usize {
        (0..l).map(|i| self.fft_size + self.cp_len(i)).sum()
    }

    pub fn slot_len(&self) -> usize {
        self.symbol_start(SYMBOLS_PER_SLOT)
    }

    fn bin(&self, k: usize) -> usize {
        (k + self.fft_size - SSB_SUBCARRIERS / 2) % self.fft_size
    }
}

/// First OFDM symbol of SSB candidate `issb` for Case A, L_max = 4.
pub fn case_a_first_symbol(issb: u8) -> usize {
    [2, 8, 16, 22][usize::from(issb & 0x3)]
}

/// Modulates the four SSB symbols (each with its CP). The frame's `active`
/// span covers all output samples.
pub fn ofdm_modulate(grid: &SsbGrid, cfg: &OfdmConfig) -> Result<IqFrame> {
    cfg.validate()?;
    let n = cfg.fft_size;
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / (n as f64).sqrt();
    let l0 = case_a_first_symbol(grid.issb);
    let mut out = Vec::with_capacity(cfg.symbol_start(l0 + SSB_SYMBOLS) - cfg.symbol_start(l0));
    for l in 0..SSB_SYMBOLS {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, &v) in grid.symbol(l).iter().enumerate() {
            buf[cfg.bin(k)] = v * scale;
        }
        ifft.process(&mut buf);
        let cp = cfg.cp_len(l0 + l);
        out.extend_from_slice(&buf[n - cp..]);
        out.extend_from_slice(&buf);
    }
    let len = out.len();
    let mut frame = IqFrame::new(out, cfg.sample_rate_hz())?;
    frame.active = Some(0..len);
    Ok(frame)
}

/// Demodulates four symbols starting (CP included) at `start`, returning the
/// 240 x 4 REs in grid order (`l * 240 + k`).
pub fn ofdm_demodulate(
    samples: &[Complex64],
    start: usize,
    issb: u8,
    cfg: &OfdmConfig,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let n = cfg.fft_size;
    let l0 = case_a_first_symbol(issb);
    let needed = start + cfg.symbol_start(l0 + SSB_SYMBOLS) - cfg.symbol_start(l0);
    if needed > samples.len() {
        return Err(Error::FrameTooShort {
            needed,
            available: samples.len(),
        });
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut res = Vec::with_capacity(SSB_SUBCARRIERS * SSB_SYMBOLS);
    let mut pos = start;
    for l in 0..SSB_SYMBOLS {
        pos += cfg.cp_len(l0 + l);
        let mut buf = samples[pos..pos + n].to_vec();
        fft.process(&mut buf);
        res.extend((0..SSB_SUBCARRIERS).map(|k| buf[cfg.bin(k)] * scale));
        pos += n;
    }
    Ok(res)
}
