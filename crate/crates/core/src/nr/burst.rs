//! One SSB burst: the transmit chain from MIB to baseband samples.

use serde::{Deserialize, Serialize};

use super::grid::{map_ssb_grid, SsbGrid};
use super::mib::MibPayload;
use super::ofdm::{case_a_first_symbol, ofdm_modulate, OfdmConfig};
use super::pbch::{pbch_transmit_mib, PbchConfig, PbchTx};
use super::sequence::{gen_dmrs, gen_pss, gen_sss};
use super::CellIdentity;
use crate::error::{Error, Result};
use crate::frame::IqFrame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[derive(Default)]
pub struct BurstConfig {
    pub ofdm: OfdmConfig,
    pub pbch: PbchConfig,
    pub issb: u8,
    /// Window length in samples. `None` means two slots.
    pub frame_len: Option<usize>,
}


impl BurstConfig {
    pub fn window_len(&self) -> usize {
        self.frame_len.unwrap_or(2 * self.ofdm.slot_len())
    }

    /// Sample index where the SSB (its first CP) starts inside the window.
    pub fn ssb_start(&self) -> usize {
        self.ofdm.symbol_start(case_a_first_symbol(self.issb))
    }
}

#[derive(Debug, Clone)]
pub struct Burst {
    pub mib: MibPayload,
    pub cell: CellIdentity,
    pub issb: u8,
    pub grid: SsbGrid,
    pub tx: PbchTx,
    pub frame: IqFrame,
    pub ssb_start: usize,
}

/// Builds the SSB grid (PSS, SSS, PBCH data and DMRS) for one MIB.
pub fn build_ssb_grid(
    mib: &MibPayload,
    cell: CellIdentity,
    issb: u8,
    cfg: PbchConfig,
) -> Result<(SsbGrid, PbchTx)> {
    let tx = pbch_transmit_mib(mib, cell, issb, cfg)?;
    let dmrs = gen_dmrs(cell, issb, mib.half_frame)?;
    let grid = map_ssb_grid(
        &tx.symbols,
        &dmrs,
        &gen_pss(cell.n_id_2())?,
        &gen_sss(cell),
        cell,
        issb,
    )?;
    Ok((grid, tx))
}

pub fn generate_burst(mib: &MibPayload, cell: CellIdentity, cfg: &BurstConfig) -> Result<Burst> {
    if cfg.issb > 3 {
        return Err(Error::field("issb", format!("{} > 3", cfg.issb)));
    }
    let (grid, tx) = build_ssb_grid(mib, cell, cfg.issb, cfg.pbch)?;
    let ssb = ofdm_modulate(&grid, &cfg.ofdm)?;
    let start = cfg.ssb_start();
    let end = start + ssb.len();
    let len = cfg.window_len();
    if end > len {
        return Err(Error::FrameTooShort {
            needed: end,
            available: len,
        });
    }
    let mut samples = vec![num_complex::Complex64::new(0.0, 0.0); len];
    samples[start..end].copy_from_slice(&ssb.samples);
    let mut frame = IqFrame::new(samples, cfg.ofdm.sample_rate_hz())?;
    frame.active = Some(start..end);
    Ok(Burst {
        mib: *mib,
        cell,
        issb: cfg.issb,
        grid,
        tx,
        frame,
        ssb_start: start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ssb_sits_at_its_symbol() {
        let cell = CellIdentity::new(42).unwrap();
        for issb in 0..4 {
            let cfg = BurstConfig {
                issb,
                ..BurstConfig::default()
            };
            let b = generate_burst(&MibPayload::default(), cell, &cfg).unwrap();
            assert_eq!(b.frame.len(), 7680);
            let span = b.frame.active.clone().unwrap();
            assert_eq!(span.len(), 4 * 274);
            assert!(b.frame.samples[..span.start].iter().all(|z| z.norm() == 0.0));
            assert!(b.frame.samples[span.end..].iter().all(|z| z.norm() == 0.0));
            let re_energy: f64 = b.grid.res.iter().map(|z| z.norm_sqr()).sum();
            let time_energy: f64 = b.frame.samples.iter().map(|z| z.norm_sqr()).sum();
            // CP samples add energy on top of the unitary transform.
            assert!(time_energy > re_energy && time_energy < re_energy * 274.0 / 256.0 + 1e-9);
        }
    }

    #[test]
    fn short_window_is_rejected() {
        let cfg = BurstConfig {
            frame_len: Some(1000),
            ..BurstConfig::default()
        };
        assert!(generate_burst(&MibPayload::default(), CellIdentity::new(0).unwrap(), &cfg).is_err());
    }
}
