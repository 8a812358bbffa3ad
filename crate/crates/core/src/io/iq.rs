//! Interleaved little-endian `f32` I/Q files with a JSON [`CaptureMeta`]
//! sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::apply_cfo;
use crate::error::{read_file, Error, Result};
use crate::frame::IqFrame;

/// SSB period of the captures.
pub const SSB_PERIOD_S: f64 = 0.02;

/// Timestamp written for synthetic files so they stay reproducible.
pub const SYNTHETIC_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureMeta {
    pub sample_rate_hz: f64,
    /// Carrier of the received signal.
    pub center_freq_hz: f64,
    /// Frequency the front end was tuned to.
    pub tuned_freq_hz: f64,
    #[serde(default)]
    pub gain_db: Option<f64>,
    /// ISO-8601.
    pub timestamp: String,
}

impl CaptureMeta {
    /// Sidecar for a frame already at baseband (no tuning offset).
    pub fn for_frame(frame: &IqFrame) -> Self {
        Self {
            sample_rate_hz: frame.sample_rate_hz,
            center_freq_hz: frame.center_freq_hz,
            tuned_freq_hz: frame.center_freq_hz,
            gain_db: frame.gain_db,
            timestamp: SYNTHETIC_TIMESTAMP.into(),
        }
    }

    /// Where the signal sits in the recorded baseband.
    pub fn offset_hz(&self) -> f64 {
        self.center_freq_hz - self.tuned_freq_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::field("sample_rate_hz", format!("{} must be > 0", self.sample_rate_hz)));
        }
        if !self.offset_hz().is_finite() {
            return Err(Error::field("center_freq_hz", "tuning offset is not finite"));
        }
        if self.timestamp.is_empty() {
            return Err(Error::field("timestamp", "empty"));
        }
        Ok(())
    }
}

/// `capture.iq` -> `capture.iq.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn encode(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for z in samples {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!("{} bytes is not a whole number of float32", bytes.len())));
    }
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::Format(format!("odd float32 count {}", bytes.len() / 4)));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re.into(), im.into())
        })
        .collect())
}

/// Writes the samples and the sidecar for `meta`.
pub fn write_capture(samples: &[Complex64], meta: &CaptureMeta, path: &Path) -> Result<()> {
    meta.validate()?;
    fs::write(path, encode(samples))?;
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(meta)?)?;
    Ok(())
}

/// Writes a baseband frame with a zero-offset sidecar next to it.
pub fn write_iq(frame: &IqFrame, path: &Path) -> Result<()> {
    frame.validate()?;
    write_capture(&frame.samples, &CaptureMeta::for_frame(frame), path)
}

/// Reads a capture and removes the tuning offset, so the returned frame is
/// centred on the signal carrier. `meta_path` defaults to the sidecar.
pub fn read_iq(path: &Path, meta_path: Option<&Path>) -> Result<IqFrame> {
    let meta_path = meta_path.map_or_else(|| sidecar_path(path), Path::to_path_buf);
    let meta_bytes = read_file(&meta_path)?;
    let meta: CaptureMeta = serde_json::from_slice(&meta_bytes)?;
    meta.validate()?;
    let samples = decode(&read_file(path)?)?;
    let mut frame = IqFrame::new(samples, meta.sample_rate_hz)?;
    frame.gain_db = meta.gain_db;
    let offset = meta.offset_hz();
    if offset != 0.0 {
        frame = apply_cfo(&frame, -offset);
    }
    frame.center_freq_hz = meta.center_freq_hz;
    Ok(frame)
}

/// Cuts a capture into consecutive windows of `window_len` samples; a short
/// tail is dropped.
pub fn split_windows(frame: &IqFrame, window_len: usize) -> Result<Vec<IqFrame>> {
    if window_len == 0 {
        return Err(Error::Config("window length must be > 0".into()));
    }
    if frame.len() < window_len {
        return Err(Error::FrameTooShort {
            needed: window_len,
            available: frame.len(),
        });
    }
    Ok(frame
        .samples
        .chunks_exact(window_len)
        .map(|c| IqFrame {
            active: None,
            ..frame.with_samples(c.to_vec())
        })
        .collect())
}

/// Samples in one SSB period.
pub fn period_samples(sample_rate_hz: f64) -> usize {
    (SSB_PERIOD_S * sample_rate_hz).round() as usize
}
