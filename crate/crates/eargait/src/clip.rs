//! Sampled audio, the raw material of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which ear a recording came from. Mono sources are tagged [`Channel::Left`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Left,
    Right,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::Left => write!(f, "left"),
            Channel::Right => write!(f, "right"),
        }
    }
}

/// A sampled waveform with rate and channel metadata.
///
/// Amplitudes are dimensionless in `[-1, 1]` and always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub channel: Channel,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32, channel: Channel) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Parameter("sample_rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Format("clip contains non-finite samples".into()));
        }
        Ok(Self { samples, sample_rate, channel })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Clip duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Root-mean-square amplitude; 0 for an empty clip.
    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum_sq: f64 = self.samples.iter().map(|s| s * s).sum();
        (sum_sq / self.samples.len() as f64).sqrt()
    }
}
