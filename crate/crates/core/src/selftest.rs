//! Oracle checks behind the `selftest` command.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::channel::apply_awgn;
use crate::error::Result;
use crate::frame::IqFrame;
use crate::nn::check::gradient_check;
use crate::nr::pbch::{pbch_decode, pbch_transmit, PbchConfig};
use crate::nr::qpsk::{qpsk_demod_hard, qpsk_llr, qpsk_modulate};
use crate::nr::{CellIdentity, MAX_CELL_ID};
use crate::rng::{stream_rng, sub_seed};

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Hard-decision QPSK bit error probability at `Es/N0`.
pub fn qpsk_ber_theory(esn0_db: f64) -> f64 {
    q_function(10f64.powf(esn0_db / 10.0).sqrt())
}

/// Monte-Carlo hard-decision QPSK BER over AWGN.
pub fn qpsk_ber_simulated(esn0_db: f64, n_bits: usize, seed: u64) -> Result<f64> {
    let n_bits = n_bits.div_ceil(2) * 2;
    let mut rng = stream_rng(seed, 0);
    let bits: Vec<u8> = (0..n_bits).map(|_| rng.random_range(0..2u8)).collect();
    let tx = IqFrame::new(qpsk_modulate(&bits)?, 1.0)?;
    let rx = apply_awgn(&tx, esn0_db, sub_seed(seed, 1))?;
    let errors = qpsk_demod_hard(&rx.samples)
        .iter()
        .zip(&bits)
        .filter(|(a, b)| a != b)
        .count();
    Ok(errors as f64 / n_bits as f64)
}

/// Noiseless PBCH encode/decode of random payloads; returns how many came
/// back intact with a passing CRC.
pub fn codec_round_trip(n_payloads: usize, n_cells: usize, seed: u64) -> Result<usize> {
    let mut rng = stream_rng(seed, 0);
    let cells: Vec<CellIdentity> = (0..n_cells.max(1))
        .map(|_| CellIdentity::new(rng.random_range(0..=MAX_CELL_ID)))
        .collect::<Result<_>>()?;
    let cfg = PbchConfig::default();
    let mut ok = 0;
    for i in 0..n_payloads {
        let payload: Vec<u8> = (0..32).map(|_| rng.random_range(0..2u8)).collect();
        let cell = cells[i % cells.len()];
        let issb = rng.random_range(0..4u8);
        let tx = pbch_transmit(&payload, cell, issb, cfg)?;
        let rx: Vec<Complex64> = tx.symbols.clone();
        let dec = pbch_decode(&qpsk_llr(&rx, 0.1), cell, issb, cfg)?;
        ok += usize::from(dec.crc_pass && dec.payload == payload);
    }
    Ok(ok)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs the codec, BER and gradient oracles. `quick` shrinks the sample sizes.
pub fn run_selftest(seed: u64, quick: bool) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let n = if quick { 100 } else { 1000 };
    let ok = codec_round_trip(n, 100, seed)?;
    checks.push(Check {
        name: "codec round trip".into(),
        passed: ok == n,
        detail: format!("{ok}/{n} payloads recovered"),
    });
    let bits = if quick { 200_000 } else { 1_000_000 };
    for (i, snr) in [0.0, 5.0, 10.0].into_iter().enumerate() {
        let sim = qpsk_ber_simulated(snr, bits, sub_seed(seed, 10 + i as u64))?;
        let theory = qpsk_ber_theory(snr);
        let rel = (sim - theory).abs() / theory;
        checks.push(Check {
            name: format!("qpsk ber {snr} dB"),
            passed: rel <= 0.15,
            detail: format!("simulated {sim:.3e}, Q-function {theory:.3e}, relative error {rel:.3}"),
        });
    }
    let archs = if quick { 5 } else { 20 };
    let mut worst: f64 = 0.0;
    for i in 0..archs {
        worst = worst.max(gradient_check(sub_seed(seed, 100 + i))?);
    }
    checks.push(Check {
        name: "gradient check".into(),
        passed: worst < 1e-4,
        detail: format!("max relative error {worst:.2e} over {archs} networks"),
    });
    Ok(checks)
}
