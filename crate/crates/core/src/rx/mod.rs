//! Classical receiver: PSS/SSS synchronization, SSB extraction, DMRS channel
//! estimation, MMSE equalization, demodulation and PBCH decoding.

pub mod estimate;
pub mod sync;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use estimate::{
    detect_dmrs_index, estimate_channel, mmse_equalize, pilot_referenced, ChannelEstimate,
    EqualizedBlock, Stage,
};
pub use sync::{detect_pss, detect_sss, SyncConfig, SyncResult};

use crate::error::{Error, Result};
use crate::frame::IqFrame;
use crate::nr::grid::SsbGrid;
use crate::nr::pbch::{pbch_decode, PbchConfig, PbchDecoded};
use crate::nr::qpsk::{qpsk_demod_hard, qpsk_llr};
use crate::nr::CellIdentity;

/// Noise variance used to scale LLRs of symbols that carry no noise estimate
/// (network outputs).
pub const NOMINAL_NOISE_VAR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RxConfig {
    pub sync: SyncConfig,
    pub pbch: PbchConfig,
}

/// Everything the receiver produced for one burst.
#[derive(Debug, Clone)]
pub struct RxOutput {
    pub sync: SyncResult,
    pub cell: CellIdentity,
    /// Detected DMRS index, i_SSB + 4 * half_frame.
    pub ibar: u8,
    pub grid: SsbGrid,
    pub estimate: ChannelEstimate,
    /// The 432 data REs straight after synchronization.
    pub post_sync: Vec<Complex64>,
    pub post_mmse: EqualizedBlock,
    pub decoded: PbchDecoded,
}

impl RxOutput {
    pub fn issb(&self) -> u8 {
        self.ibar & 0x3
    }

    pub fn half_frame(&self) -> bool {
        self.ibar >= 4
    }

    /// The 144 DMRS REs referenced to the known pilots.
    pub fn dmrs_referenced(&self) -> Result<Vec<Complex64>> {
        pilot_referenced(&self.grid.dmrs(), self.cell, self.ibar)
    }
}

/// Extracts the CFO-compensated SSB grid at the detected timing.
pub fn extract_ssb(frame: &IqFrame, sync: &SyncResult, cfg: &SyncConfig) -> Result<SsbGrid> {
    let cell = sync
        .cell()
        .ok_or_else(|| Error::Config("SSS must be detected before extraction".into()))?;
    SsbGrid::from_res(sync::demodulate_at(frame, sync, cfg)?, cell, 0)
}

/// LLR-based decoding of 432 equalized symbols.
pub fn decode_symbols(
    symbols: &[Complex64],
    noise_var: f64,
    cell: CellIdentity,
    issb: u8,
    cfg: PbchConfig,
) -> Result<PbchDecoded> {
    pbch_decode(&qpsk_llr(symbols, noise_var), cell, issb, cfg)
}

/// Full receive chain on one burst window.
pub fn receive(frame: &IqFrame, cfg: &RxConfig) -> Result<RxOutput> {
    let pss = detect_pss(frame, &cfg.sync)?;
    let sync = detect_sss(frame, &pss, &cfg.sync)?;
    let mut grid = extract_ssb(frame, &sync, &cfg.sync)?;
    let cell = sync.cell().expect("SSS detected");
    let (ibar, _) = detect_dmrs_index(&grid, cell)?;
    grid.issb = ibar & 0x3;
    let estimate = estimate_channel(&grid, cell, ibar)?;
    let post_mmse = mmse_equalize(&grid, &estimate)?;
    let decoded = decode_symbols(
        &post_mmse.symbols,
        estimate.noise_var,
        cell,
        grid.issb,
        cfg.pbch,
    )?;
    Ok(RxOutput {
        sync,
        cell,
        ibar,
        post_sync: grid.data(),
        grid,
        estimate,
        post_mmse,
        decoded,
    })
}

/// Hamming distance over length.
pub fn compute_ber(tx_bits: &[u8], rx_bits: &[u8]) -> Result<f64> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::length("BER bit vectors", tx_bits.len(), rx_bits.len()));
    }
    if tx_bits.is_empty() {
        return Ok(0.0);
    }
    let errors = tx_bits.iter().zip(rx_bits).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx_bits.len() as f64)
}

/// BER of hard decisions on `symbols` against the transmitted coded bits.
pub fn symbol_ber(tx_bits: &[u8], symbols: &[Complex64]) -> Result<f64> {
    compute_ber(tx_bits, &qpsk_demod_hard(symbols))
}

/// One JSON decode record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub n_cell_id: Option<u16>,
    pub sfn: Option<u16>,
    pub crc_pass: bool,
    pub ber_pre_nn: Option<f64>,
    pub ber_post_nn: Option<f64>,
    pub snr_db: Option<f64>,
}
