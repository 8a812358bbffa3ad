//! PSS timing/CFO search and SSS cell identification.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::IqFrame;
use crate::nr::grid::{SsbGrid, SYNC_START};
use crate::nr::ofdm::{ofdm_demodulate, ofdm_modulate, OfdmConfig};
use crate::nr::sequence::{gen_pss, gen_sss, SYNC_SEQ_LEN};
use crate::nr::CellIdentity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncConfig {
    pub ofdm: OfdmConfig,
    /// Minimum PSS peak-to-median ratio.
    pub pss_threshold: f64,
    /// Minimum SSS best-to-median ratio over the 336 candidates.
    pub sss_threshold: f64,
    /// Samples the FFT window is moved back into the cyclic prefix.
    pub fft_backoff: usize,
}

impl Default for SyncConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::default(),
            pss_threshold: 6.0,
            sss_threshold: 3.0,
            fft_backoff: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncResult {
    /// First sample of the PSS symbol, cyclic prefix included.
    pub timing_offset_samples: usize,
    pub coarse_cfo_hz: f64,
    pub n_id_2: u8,
    /// Filled by [`detect_sss`].
    pub n_id_1: Option<u16>,
    pub correlation_peak: f64,
    pub peak_to_side: f64,
}

impl SyncResult {
    pub fn cell(&self) -> Option<CellIdentity> {
        self.n_id_1
            .and_then(|n1| CellIdentity::from_parts(n1, self.n_id_2).ok())
    }
}

/// Time-domain PSS symbol (no CP) for `n_id_2`.
pub fn pss_template(n_id_2: u8, cfg: &OfdmConfig) -> Result<Vec<Complex64>> {
    let pss = gen_pss(n_id_2)?;
    let mut g = SsbGrid::new(CellIdentity::new(u16::from(n_id_2))?, 0);
    for (n, &v) in pss.iter().enumerate() {
        g.set(SYNC_START + n, 0, Complex64::new(v, 0.0));
    }
    let f = ofdm_modulate(&g, cfg)?;
    let cp = cfg.cp_len(2);
    Ok(f.samples[cp..cp + cfg.fft_size].to_vec())
}

/// `r[m] = sum_i x[m + i] * conj(t[i])` for `m in 0..=x.len() - t.len()`.
pub fn cross_correlate(x: &[Complex64], t: &[Complex64]) -> Vec<Complex64> {
    if t.len() > x.len() {
        return Vec::new();
    }
    let n = (x.len() + t.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let zero = Complex64::new(0.0, 0.0);
    let mut xf: Vec<Complex64> = x.iter().copied().chain(std::iter::repeat(zero)).take(n).collect();
    let mut tf: Vec<Complex64> = t.iter().copied().chain(std::iter::repeat(zero)).take(n).collect();
    fwd.process(&mut xf);
    fwd.process(&mut tf);
    for (a, b) in xf.iter_mut().zip(&tf) {
        *a *= b.conj() / n as f64;
    }
    inv.process(&mut xf);
    xf.truncate(x.len() - t.len() + 1);
    xf
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    let mid = s.len() / 2;
    *s.select_nth_unstable_by(mid, |a, b| a.total_cmp(b)).1
}

/// Searches the three PSS hypotheses over all lags with a split-template
/// correlator (`|c1| + |c2|`) and estimates the CFO from `arg(c2 conj(c1))`.
pub fn detect_pss(frame: &IqFrame, cfg: &SyncConfig) -> Result<SyncResult> {
    cfg.ofdm.validate()?;
    let n = cfg.ofdm.fft_size;
    let half = n / 2;
    let cp = cfg.ofdm.cp_len(2);
    if frame.len() < n + cp {
        return Err(Error::FrameTooShort {
            needed: n + cp,
            available: frame.len(),
        });
    }
    let lags = frame.len() - n + 1;
    let mut best: Option<(f64, f64, usize, u8, Complex64, Complex64)> = None;
    for n_id_2 in 0..3u8 {
        let t = pss_template(n_id_2, &cfg.ofdm)?;
        let r1 = cross_correlate(&frame.samples, &t[..half]);
        let r2 = cross_correlate(&frame.samples, &t[half..]);
        let metric: Vec<f64> = (0..lags).map(|m| r1[m].norm() + r2[m + half].norm()).collect();
        let med = median(&metric);
        for (m, &v) in metric.iter().enumerate() {
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, med, m, n_id_2, r1[m], r2[m + half]));
            }
        }
    }
    let (peak, med, m, n_id_2, c1, c2) = best.expect("at least one lag");
    let ratio = if med > 0.0 { peak / med } else { f64::INFINITY };
    if !(ratio >= cfg.pss_threshold) || peak == 0.0 {
        return Err(Error::PssNotFound {
            ratio,
            threshold: cfg.pss_threshold,
        });
    }
    if m < cp {
        return Err(Error::FrameTooShort {
            needed: cp,
            available: m,
        });
    }
    let cfo = (c2 * c1.conj()).arg() / (2.0 * PI * half as f64 / frame.sample_rate_hz);
    Ok(SyncResult {
        timing_offset_samples: m - cp,
        coarse_cfo_hz: cfo,
        n_id_2,
        n_id_1: None,
        correlation_peak: peak,
        peak_to_side: ratio,
    })
}

/// Removes the coarse CFO: sample `n` times `exp(-j 2 pi cfo n / fs)`.
pub fn derotate(frame: &IqFrame, cfo_hz: f64) -> Vec<Complex64> {
    let w = -2.0 * PI * cfo_hz / frame.sample_rate_hz;
    frame
        .samples
        .iter()
        .enumerate()
        .map(|(i, &x)| x * Complex64::from_polar(1.0, w * i as f64))
        .collect()
}

/// CFO-compensated 240 x 4 REs at the detected timing (grid order `l * 240 + k`).
pub fn demodulate_at(frame: &IqFrame, sync: &SyncResult, cfg: &SyncConfig) -> Result<Vec<Complex64>> {
    let start = sync
        .timing_offset_samples.saturating_sub(cfg.fft_backoff);
    let shift = sync.timing_offset_samples - start;
    let samples = derotate(frame, sync.coarse_cfo_hz);
    let mut res = ofdm_demodulate(&samples, start, 0, &cfg.ofdm)?;
    if shift > 0 {
        // Undo the linear phase of an early FFT window.
        let n = cfg.ofdm.fft_size as f64;
        for (i, v) in res.iter_mut().enumerate() {
            let k = (i % 240) as f64 - 120.0;
            *v *= Complex64::from_polar(1.0, 2.0 * PI * k * shift as f64 / n);
        }
    }
    Ok(res)
}

/// Per-candidate coherent SSS metric using the PSS as phase reference.
pub fn sss_metrics(res: &[Complex64], n_id_2: u8) -> Result<Vec<f64>> {
    let pss = gen_pss(n_id_2)?;
    let y_pss = &res[SYNC_START..SYNC_START + SYNC_SEQ_LEN];
    let y_sss = &res[2 * 240 + SYNC_START..2 * 240 + SYNC_START + SYNC_SEQ_LEN];
    let h: Vec<Complex64> = y_pss.iter().zip(&pss).map(|(y, &p)| y * p).collect();
    let z: Vec<Complex64> = y_sss.iter().zip(&h).map(|(y, h)| y * h.conj()).collect();
    (0..336u16)
        .map(|n1| {
            let sss = gen_sss(CellIdentity::from_parts(n1, n_id_2)?);
            Ok(z.iter().zip(&sss).map(|(z, &s)| z * s).sum::<Complex64>().norm())
        })
        .collect()
}

/// Identifies N_ID^(1) by coherent SSS correlation.
pub fn detect_sss(frame: &IqFrame, sync: &SyncResult, cfg: &SyncConfig) -> Result<SyncResult> {
    let res = demodulate_at(frame, sync, cfg)?;
    let metrics = sss_metrics(&res, sync.n_id_2)?;
    let (best, peak) = metrics
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let med = median(&metrics);
    let ratio = if med > 0.0 { peak / med } else { f64::INFINITY };
    if !(ratio >= cfg.sss_threshold) {
        return Err(Error::AmbiguousCell {
            ratio,
            threshold: cfg.sss_threshold,
        });
    }
    Ok(SyncResult {
        n_id_1: Some(best as u16),
        ..*sync
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::channel::{apply_awgn, simulate, ChannelProfile};
    use crate::nr::burst::{generate_burst, BurstConfig};
    use crate::nr::mib::MibPayload;

    fn burst_frame(cell: u16, seed: u64) -> (IqFrame, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = generate_burst(
            &MibPayload::random(&mut rng),
            CellIdentity::new(cell).unwrap(),
            &BurstConfig::default(),
        )
        .unwrap();
        (b.frame, b.ssb_start)
    }

    #[test]
    fn fft_correlation_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let x: Vec<Complex64> = (0..300).map(|_| c()).collect();
        let t: Vec<Complex64> = (0..40).map(|_| c()).collect();
        let r = cross_correlate(&x, &t);
        assert_eq!(r.len(), 261);
        for m in [0, 17, 260] {
            let direct: Complex64 = t.iter().enumerate().map(|(i, ti)| x[m + i] * ti.conj()).sum();
            assert!((r[m] - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn pss_templates_separate_in_time() {
        // Brute-force lagged correlation: each template against every other at all lags.
        let cfg = OfdmConfig::default();
        let t: Vec<Vec<Complex64>> = (0..3).map(|i| pss_template(i, &cfg).unwrap()).collect();
        for a in 0..3 {
            let auto: f64 = t[a].iter().map(|z| z.norm_sqr()).sum();
            for b in 0..3 {
                if a == b {
                    continue;
                }
                let mut padded = vec![Complex64::new(0.0, 0.0); 256];
                padded.extend_from_slice(&t[b]);
                padded.extend(vec![Complex64::new(0.0, 0.0); 256]);
                let cross = cross_correlate(&padded, &t[a])
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(auto / cross > 4.0, "{a} vs {b}: {}", auto / cross);
            }
        }
    }

    #[test]
    fn noiseless_timing_and_identity() {
        let cfg = SyncConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..100 {
            let cell = rng.random_range(0..=1007);
            let (f, start) = burst_frame(cell, trial);
            let s = detect_pss(&f, &cfg).unwrap();
            assert_eq!(s.timing_offset_samples, start);
            assert_eq!(s.n_id_2, (cell % 3) as u8);
            assert!(s.coarse_cfo_hz.abs() < 1e-6);
            if trial < 50 {
                let s = detect_sss(&f, &s, &cfg).unwrap();
                assert_eq!(s.cell().unwrap().id(), cell);
            }
        }
    }

    #[test]
    fn matched_sss_hypothesis_wins() {
        let cfg = SyncConfig::default();
        for cell in [0u16, 5, 100, 500, 1007] {
            let (f, _) = burst_frame(cell, u64::from(cell));
            let s = detect_pss(&f, &cfg).unwrap();
            let res = demodulate_at(&f, &s, &cfg).unwrap();
            let right = sss_metrics(&res, (cell % 3) as u8).unwrap();
            let peak = right.iter().fold(0.0, |a: f64, &b| a.max(b));
            for wrong in (0..3).filter(|&n| n != (cell % 3) as u8) {
                let m = sss_metrics(&res, wrong).unwrap();
                assert!(m.iter().all(|&v| v < peak));
            }
        }
    }

    #[test]
    fn cfo_is_estimated() {
        let cfg = SyncConfig::default();
        let (f, start) = burst_frame(77, 3);
        for cfo in [-7000.0, -3000.0, 1500.0, 7400.0] {
            let p = ChannelProfile {
                cfo_hz: cfo,
                ..ChannelProfile::identity()
            };
            let s = detect_pss(&simulate(&f, &p).unwrap(), &cfg).unwrap();
            assert_eq!(s.timing_offset_samples, start);
            assert!((s.coarse_cfo_hz - cfo).abs() < 150.0, "{cfo}: {}", s.coarse_cfo_hz);
        }
    }

    #[test]
    fn pure_noise_is_not_found() {
        let cfg = SyncConfig::default();
        let silent = IqFrame {
            active: Some(0..7680),
            ..IqFrame::new(vec![Complex64::new(1.0, 0.0); 7680], 3.84e6).unwrap()
        };
        for seed in 0..20 {
            let noise_only = apply_awgn(&silent, 0.0, seed).unwrap();
            let samples = noise_only
                .samples
                .iter()
                .map(|z| z - Complex64::new(1.0, 0.0))
                .collect();
            let f = IqFrame::new(samples, 3.84e6).unwrap();
            assert!(matches!(detect_pss(&f, &cfg), Err(Error::PssNotFound { .. })));
        }
    }

    #[test]
    fn short_frame_is_rejected() {
        let f = IqFrame::new(vec![Complex64::new(0.0, 0.0); 100], 3.84e6).unwrap();
        assert!(matches!(
            detect_pss(&f, &SyncConfig::default()),
            Err(Error::FrameTooShort { .. })
        ));
        let (f, _) = burst_frame(3, 3);
        let s = detect_pss(&f, &SyncConfig::default()).unwrap();
        let cut = IqFrame::new(f.samples[..s.timing_offset_samples + 600].to_vec(), 3.84e6).unwrap();
        assert!(detect_sss(&cut, &s, &SyncConfig::default()).is_err());
    }
}
