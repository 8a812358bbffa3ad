//! Complex baseband sample streams.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metadata of an [`IqFrame`] without its samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub sample_rate_hz: f64,
    pub center_freq_hz: f64,
    pub gain_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IqFrame {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    pub center_freq_hz: f64,
    pub gain_db: Option<f64>,
    /// Sample span occupied by signal, used as the SNR reference.
    pub active: Option<Range<usize>>,
}

impl IqFrame {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        let f = Self {
            samples,
            sample_rate_hz,
            center_freq_hz: 0.0,
            gain_db: None,
            active: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::field("sample_rate_hz", format!("{} must be > 0", self.sample_rate_hz)));
        }
        if self.samples.is_empty() {
            return Err(Error::field("samples", "frame is empty"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn meta(&self) -> FrameMeta {
        FrameMeta {
            sample_rate_hz: self.sample_rate_hz,
            center_freq_hz: self.center_freq_hz,
            gain_db: self.gain_db,
        }
    }

    /// Copy with new samples and the same metadata.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Self {
        Self {
            samples: Vec::new(),
            sample_rate_hz: self.sample_rate_hz,
            center_freq_hz: self.center_freq_hz,
            gain_db: self.gain_db,
            active: self.active.clone(),
        }
    }

    /// Mean power over the active span, or over the whole frame.
    pub fn signal_power(&self) -> f64 {
        let span = self.active.clone().unwrap_or(0..self.samples.len());
        let s = &self.samples[span.start.min(self.len())..span.end.min(self.len())];
        if s.is_empty() {
            return 0.0;
        }
        s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len() as f64
    }
}
