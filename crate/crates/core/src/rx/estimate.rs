//! DMRS index detection, least-squares channel estimation with linear
//! interpolation in frequency, and MMSE equalization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::nr::grid::{dmrs_flags, pbch_positions, SsbGrid, PBCH_RES};
use crate::nr::sequence::gen_dmrs_ibar;
use crate::nr::CellIdentity;

/// Processing stage of a block of 432 PBCH data symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    PostSync,
    PostMmse,
    PostNn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Estimate at every PBCH RE, mapping order.
    pub h: Vec<Complex64>,
    pub noise_var: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedBlock {
    pub symbols: Vec<Complex64>,
    pub stage: Stage,
}

/// Received DMRS times the conjugate of the reference for `ibar`.
pub fn pilot_referenced(dmrs_rx: &[Complex64], cell: CellIdentity, ibar: u8) -> Result<Vec<Complex64>> {
    let x = gen_dmrs_ibar(cell, ibar)?;
    check_len("DMRS", x.len(), dmrs_rx.len())?;
    Ok(dmrs_rx.iter().zip(&x).map(|(y, x)| y * x.conj()).collect())
}

/// Picks the DMRS index (i_SSB + 4 * half_frame) maximizing the adjacent-pilot
/// coherence `|sum h_p conj(h_{p+1})|`, which tolerates a phase slope.
pub fn detect_dmrs_index(grid: &SsbGrid, cell: CellIdentity) -> Result<(u8, f64)> {
    let y = grid.dmrs();
    let mut best = (0u8, f64::MIN);
    for ibar in 0..8u8 {
        let h = pilot_referenced(&y, cell, ibar)?;
        let m = h.windows(2).map(|w| w[0] * w[1].conj()).sum::<Complex64>().norm();
        if m > best.1 {
            best = (ibar, m);
        }
    }
    Ok(best)
}

/// Runs of PBCH REs sharing a symbol and contiguous subcarrier segment.
fn segments() -> Vec<Vec<usize>> {
    let pos = pbch_positions();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &(k, l)) in pos.iter().enumerate() {
        let continues = i > 0 && pos[i - 1].1 == l && pos[i - 1].0 + 1 == k;
        if continues {
            out.last_mut().expect("segment open").push(i);
        } else {
            out.push(vec![i]);
        }
    }
    out
}

/// LS estimates at the DMRS, linearly interpolated per segment in frequency
/// with nearest-pilot extrapolation at the edges. `ibar` = i_SSB + 4 * half_frame.
pub fn estimate_channel(grid: &SsbGrid, cell: CellIdentity, ibar: u8) -> Result<ChannelEstimate> {
    let x = gen_dmrs_ibar(cell, ibar)?;
    let y = grid.pbch();
    let flags = dmrs_flags(cell);
    let pos = pbch_positions();
    let mut h = vec![Complex64::new(0.0, 0.0); PBCH_RES];
    let mut pilot_iter = x.iter();
    let mut residual = 0.0;
    let mut residual_n = 0usize;
    for seg in segments() {
        let pilots: Vec<(f64, Complex64)> = seg
            .iter()
            .filter(|&&i| flags[i])
            .map(|&i| (pos[i].0 as f64, y[i] * pilot_iter.next().expect("144 pilots").conj()))
            .collect();
        for w in pilots.windows(3) {
            residual += (w[1].1 - (w[0].1 + w[2].1) * 0.5).norm_sqr();
            residual_n += 1;
        }
        for &i in &seg {
            let k = pos[i].0 as f64;
            let right = pilots.iter().position(|p| p.0 >= k);
            h[i] = match right {
                Some(0) => pilots[0].1,
                None => pilots[pilots.len() - 1].1,
                Some(r) => {
                    let (k0, h0) = pilots[r - 1];
                    let (k1, h1) = pilots[r];
                    h0 + (h1 - h0) * ((k - k0) / (k1 - k0))
                }
            };
        }
    }
    let noise_var = if residual_n > 0 {
        residual / residual_n as f64 / 1.5
    } else {
        0.0
    };
    Ok(ChannelEstimate { h, noise_var })
}

/// `x = conj(h) y / max(|h|^2 + noise_var, 1e-12)` on the 432 data REs.
pub fn mmse_equalize(grid: &SsbGrid, est: &ChannelEstimate) -> Result<EqualizedBlock> {
    check_len("channel estimate", PBCH_RES, est.h.len())?;
    let y = grid.pbch();
    let pos = pbch_positions();
    let nv = est.noise_var.max(0.0);
    let symbols = pos
        .iter()
        .enumerate()
        .filter(|(_, &(k, l))| grid.data_mask[l * 240 + k])
        .map(|(i, _)| est.h[i].conj() * y[i] / (est.h[i].norm_sqr() + nv).max(1e-12))
        .collect();
    Ok(EqualizedBlock {
        symbols,
        stage: Stage::PostMmse,
    })
}
