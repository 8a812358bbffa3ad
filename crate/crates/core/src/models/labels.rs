//! Regeneration-after-decoding: labels for captured bursts come from
//! re-encoding the CRC-verified payload.

use serde::{Deserialize, Serialize};

use super::dataset::{stage_input, EqInput, Example, Origin, SymbolDataset};
use super::realify;
use crate::error::Result;
use crate::frame::IqFrame;
use crate::nr::pbch::{pbch_transmit, PbchConfig};
use crate::rx::{receive, RxConfig, RxOutput, Stage};

/// Re-encodes the decoded payload to the 432 transmitted symbols (realified).
/// Returns `None` when the CRC failed; such bursts must not be labelled.
pub fn regenerate_labels(out: &RxOutput, cfg: PbchConfig) -> Result<Option<Vec<f64>>> {
    if !out.decoded.crc_pass {
        return Ok(None);
    }
    let tx = pbch_transmit(&out.decoded.payload, out.cell, out.issb(), cfg)?;
    Ok(Some(realify(&tx.symbols)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CaptureStats {
    pub windows: usize,
    pub sync_failures: usize,
    pub crc_failures: usize,
    pub accepted: usize,
}

/// Runs the receiver on each capture window and keeps CRC-verified bursts.
pub fn build_captured_dataset(
    windows: &[IqFrame],
    stage: Stage,
    eq_input: EqInput,
    rx: &RxConfig,
    snr_tag: f64,
) -> Result<(SymbolDataset, CaptureStats)> {
    let mut stats = CaptureStats {
        windows: windows.len(),
        ..CaptureStats::default()
    };
    let mut examples = Vec::new();
    for (i, w) in windows.iter().enumerate() {
        let Ok(out) = receive(w, rx) else {
            stats.sync_failures += 1;
            continue;
        };
        let Some(target) = regenerate_labels(&out, rx.pbch)? else {
            stats.crc_failures += 1;
            continue;
        };
        examples.push(Example {
            input: stage_input(&out, stage, eq_input)?,
            target,
            mmse: realify(&out.post_mmse.symbols),
            snr_db: snr_tag,
            cell_id: out.cell.id(),
            crc_pass: true,
            seed: i as u64,
        });
    }
    stats.accepted = examples.len();
    let ds = SymbolDataset::from_examples(stage, eq_input, Origin::Captured, examples, stats.sync_failures)?;
    Ok((ds, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::dataset::{synthetic_draw, DatasetConfig, SnrSpec};
    use crate::nr::pbch::PbchDecoded;

    #[test]
    fn clean_burst_regenerates_exactly() {
        let cfg = DatasetConfig::new(Stage::PostMmse, SnrSpec::Noiseless, 1, 0);
        for seed in 0..10 {
            let d = synthetic_draw(seed, f64::INFINITY, &cfg).unwrap();
            let out = d.rx.unwrap();
            let labels = regenerate_labels(&out, cfg.rx.pbch).unwrap().unwrap();
            assert_eq!(labels, realify(&d.burst.tx.symbols));
        }
    }

    #[test]
    fn crc_failure_is_rejected() {
        let cfg = DatasetConfig::new(Stage::PostMmse, SnrSpec::Noiseless, 1, 0);
        let mut out = synthetic_draw(3, f64::INFINITY, &cfg).unwrap().rx.unwrap();
        out.decoded = PbchDecoded {
            payload: out.decoded.payload.clone(),
            crc_pass: false,
        };
        assert_eq!(regenerate_labels(&out, cfg.rx.pbch).unwrap(), None);
    }

    #[test]
    fn captured_windows_are_filtered() {
        let cfg = DatasetConfig::new(Stage::PostSync, SnrSpec::Fixed(20.0), 1, 0);
        let mut windows: Vec<IqFrame> = (0..4)
            .map(|s| {
                let d = synthetic_draw(s, 20.0, &cfg).unwrap();
                crate::channel::apply_awgn(&d.burst.frame, 20.0, s).unwrap()
            })
            .collect();
        windows.push(IqFrame::new(vec![num_complex::Complex64::new(0.0, 0.0); 7680], 3.84e6).unwrap());
        let (ds, stats) =
            build_captured_dataset(&windows, Stage::PostSync, EqInput::PilotReferenced, &cfg.rx, 20.0)
                .unwrap();
        assert_eq!(stats.windows, 5);
        assert_eq!(stats.sync_failures, 1);
        assert_eq!(stats.accepted, 4);
        assert_eq!(ds.inputs.dim(), (4, 1152));
        assert_eq!(ds.origin, Origin::Captured);
    }
}
