//! Synthetic GEO link impairments: fractional delay, carrier frequency offset
//! and AWGN, applied in that order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::IqFrame;
use crate::rng::{stream_rng, sub_seed};

pub const DELAY_TAPS: usize = 64;

/// Default total delay range in seconds.
pub const DEFAULT_DELAY_RANGE_S: (f64, f64) = (0.0, 1e-3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    /// Per-sample SNR over the active span. `+inf` disables noise.
    #[serde(with = "crate::serde_ext::inf_f64")]
    pub snr_db: f64,
    pub cfo_hz: f64,
    pub integer_delay_samples: usize,
    pub fractional_delay_samples: f64,
    pub seed: u64,
}

impl ChannelProfile {
    /// No delay, no CFO, no noise.
    pub fn identity() -> Self {
        Self {
            snr_db: f64::INFINITY,
            cfo_hz: 0.0,
            integer_delay_samples: 0,
            fractional_delay_samples: 0.0,
            seed: 0,
        }
    }

    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db,
            seed,
            ..Self::identity()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.fractional_delay_samples) {
            return Err(Error::field(
                "fractional_delay_samples",
                format!("{} not in [0, 1)", self.fractional_delay_samples),
            ));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::field("snr_db", format!("{} is not a valid SNR", self.snr_db)));
        }
        if !self.cfo_hz.is_finite() {
            return Err(Error::NonFinite("cfo_hz"));
        }
        Ok(())
    }

    /// Seed used for the noise stream.
    pub fn noise_seed(&self) -> u64 {
        sub_seed(self.seed, 1)
    }
}

/// Draws CFO ~ U(-scs/2, scs/2) and a total delay ~ U(delay range), split
/// into integer and fractional samples.
pub fn draw_profile(
    seed: u64,
    scs_hz: f64,
    delay_range_s: (f64, f64),
    snr_db: f64,
    sample_rate_hz: f64,
) -> Result<ChannelProfile> {
    if !(scs_hz > 0.0) {
        return Err(Error::field("scs_hz", format!("{scs_hz} must be > 0")));
    }
    let (lo, hi) = delay_range_s;
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::field("delay_range_s", format!("invalid range [{lo}, {hi}]")));
    }
    let mut rng = stream_rng(seed, 0);
    let cfo_hz = rng.random_range(-scs_hz / 2.0..scs_hz / 2.0);
    let delay = if hi > lo { rng.random_range(lo..hi) } else { lo } * sample_rate_hz;
    let p = ChannelProfile {
        snr_db,
        cfo_hz,
        integer_delay_samples: delay.floor() as usize,
        fractional_delay_samples: delay - delay.floor(),
        seed,
    };
    p.validate()?;
    Ok(p)
}

pub fn apply_cfo(frame: &IqFrame, cfo_hz: f64) -> IqFrame {
    if cfo_hz == 0.0 {
        return frame.clone();
    }
    let w = 2.0 * PI * cfo_hz / frame.sample_rate_hz;
    let out = frame
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| x * Complex64::from_polar(1.0, w * n as f64))
        .collect();
    frame.with_samples(out)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Hann-windowed sinc taps for tap offsets `-31..=32` approximating a delay of `d` samples.
pub fn fractional_delay_taps(d: f64) -> Vec<f64> {
    let half = (DELAY_TAPS / 2) as f64;
    let taps: Vec<f64> = (0..DELAY_TAPS)
        .map(|i| {
            let t = i as f64 - (half - 1.0) - d;
            let w = if t.abs() < half {
                0.5 * (1.0 + (PI * t / half).cos())
            } else {
                0.0
            };
            sinc(t) * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Delays by `integer + fractional` samples, zero-filling the head and
/// keeping the frame length.
pub fn apply_delay(frame: &IqFrame, integer: usize, fractional: f64) -> Result<IqFrame> {
    if !(0.0..1.0).contains(&fractional) {
        return Err(Error::field("fractional_delay", format!("{fractional} not in [0, 1)")));
    }
    let n = frame.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; n];
    if fractional == 0.0 {
        if integer < n {
            out[integer..].copy_from_slice(&frame.samples[..n - integer]);
        }
    } else {
        let taps = fractional_delay_taps(fractional);
        let center = DELAY_TAPS as isize / 2 - 1;
        for (m, o) in out.iter_mut().enumerate().skip(integer) {
            let base = (m - integer) as isize;
            let mut acc = zero;
            for (i, &h) in taps.iter().enumerate() {
                let src = base - (i as isize - center);
                if src >= 0 && (src as usize) < n {
                    acc += frame.samples[src as usize] * h;
                }
            }
            *o = acc;
        }
    }
    let mut f = frame.with_samples(out);
    f.active = frame
        .active
        .clone()
        .map(|r| (r.start + integer).min(n)..(r.end + integer).min(n));
    Ok(f)
}

/// Adds complex Gaussian noise with variance `P / 10^(snr/10)` where `P` is
/// the mean power of the frame's active span.
pub fn apply_awgn(frame: &IqFrame, snr_db: f64, seed: u64) -> Result<IqFrame> {
    if snr_db == f64::INFINITY {
        return Ok(frame.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::field("snr_db", format!("{snr_db} is not a valid SNR")));
    }
    let p = frame.signal_power();
    if !(p > 0.0) {
        return Err(Error::ZeroPower);
    }
    let sigma = (p / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    let mut rng = stream_rng(seed, 0);
    let out = frame
        .samples
        .iter()
        .map(|&x| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            x + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(frame.with_samples(out))
}

/// Delay, then CFO, then AWGN.
pub fn simulate(frame: &IqFrame, profile: &ChannelProfile) -> Result<IqFrame> {
    profile.validate()?;
    let delayed = apply_delay(
        frame,
        profile.integer_delay_samples,
        profile.fractional_delay_samples,
    )?;
    let rotated = apply_cfo(&delayed, profile.cfo_hz);
    apply_awgn(&rotated, profile.snr_db, profile.noise_seed())
}
