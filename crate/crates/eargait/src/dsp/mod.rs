//! The segmentation pipeline: raw in-ear audio to fixed-length gait cycles.
//!
//! Stages, in order: integer decimation to 4 kHz, 50 Hz zero-phase lowpass,
//! Hilbert envelopes smoothed at 3 Hz, peak detection and upper/lower peak
//! pairing into steps, then cycle extraction (every other step starts a
//! cycle, because one gait cycle is two steps) with spline resampling to a
//! fixed 4,000 samples.
//!
//! Every stage is a pure function; the composition is deterministic and
//! scale-invariant (peak thresholds are relative to the envelope amplitude).

mod envelope;
mod filter;
mod peaks;
mod spline;

pub use envelope::{envelopes, EnvelopePair};
pub use filter::{butterworth_lowpass, decimate, filtfilt, lowpass, Biquad};
pub use peaks::{detect_steps, find_peaks, PeakConfig, StepEvent};
pub use spline::resample;

use serde::{Deserialize, Serialize};

use crate::clip::{AudioClip, Channel};
use crate::error::{Error, Result};

/// Fixed length of every extracted gait cycle, in samples.
pub const CYCLE_LEN: usize = 4000;

/// One two-step gait cycle, resampled to exactly [`CYCLE_LEN`] samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaitCycle {
    pub samples: Vec<f64>,
    /// Duration of the cycle before resampling, seconds.
    pub duration_s: f64,
    pub subject_id: String,
    pub session_id: String,
    pub side: Channel,
}

impl GaitCycle {
    /// True when two cycles belong to the same subject and session.
    pub fn same_origin(&self, other: &GaitCycle) -> bool {
        self.subject_id == other.subject_id && self.session_id == other.session_id
    }
}

/// Where extracted cycles should say they came from.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub subject_id: String,
    pub session_id: String,
}

/// Parameters of the full segmentation pipeline. Defaults follow the
/// standard configuration; every field is exposed as a CLI flag.
#[derive(Debug, Clone)]
pub struct SegmentConfig {
    /// Internal processing rate; inputs must be an integer multiple of it.
    pub target_rate: u32,
    /// Gait-band lowpass cutoff, Hz.
    pub lowpass_cutoff_hz: f64,
    /// Envelope smoothing cutoff, Hz.
    pub envelope_cutoff_hz: f64,
    /// Cycles shorter than this are discarded, seconds.
    pub min_cycle_s: f64,
    /// Cycles longer than this are discarded, seconds.
    pub max_cycle_s: f64,
    pub peaks: PeakConfig,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            target_rate: 4000,
            lowpass_cutoff_hz: 50.0,
            envelope_cutoff_hz: 3.0,
            min_cycle_s: 0.5,
            max_cycle_s: 2.0,
            peaks: PeakConfig::default(),
        }
    }
}

/// Result of segmenting one clip.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub steps: Vec<StepEvent>,
    pub cycles: Vec<GaitCycle>,
    /// Rate the steps and cycles were extracted at (the target rate).
    pub sample_rate: u32,
}

/// Cut a filtered clip into gait cycles at every other step.
///
/// Step 0, 2, 4, ... are cycle start points; a cycle is the samples between
/// consecutive start points, discarded if its duration falls outside the
/// configured bounds, otherwise spline-resampled to [`CYCLE_LEN`] samples.
/// Partial cycles at the clip edges are never emitted.
pub fn extract_cycles(
    clip: &AudioClip,
    steps: &[StepEvent],
    cfg: &SegmentConfig,
    origin: &Provenance,
) -> Result<Vec<GaitCycle>> {
    if steps.len() < 3 {
        return Err(Error::InsufficientSteps { found: steps.len() });
    }
    let fs = clip.sample_rate as f64;
    let boundaries: Vec<f64> = steps.iter().step_by(2).map(|s| s.time_s).collect();
    let mut cycles = Vec::new();
    for pair in boundaries.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let duration = t1 - t0;
        if duration < cfg.min_cycle_s || duration > cfg.max_cycle_s {
            continue;
        }
        let i0 = (t0 * fs).round() as usize;
        let i1 = ((t1 * fs).round() as usize).min(clip.samples.len() - 1);
        if i1 <= i0 + 1 {
            continue;
        }
        let raw = &clip.samples[i0..=i1];
        cycles.push(GaitCycle {
            samples: resample(raw, CYCLE_LEN),
            duration_s: duration,
            subject_id: origin.subject_id.clone(),
            session_id: origin.session_id.clone(),
            side: clip.channel,
        });
    }
    Ok(cycles)
}

/// Run the whole segmentation pipeline on a raw clip.
///
/// The clip may arrive at any integer multiple of the target rate (48 kHz
/// in the canonical recording setup); a clip already at the target rate
/// skips decimation. Fewer than three detected steps yields an error from
/// cycle extraction, except that a clip with no detectable steps at all
/// returns an empty segmentation rather than failing.
pub fn segment(raw: &AudioClip, cfg: &SegmentConfig, origin: &Provenance) -> Result<Segmentation> {
    let at_rate = decimate(raw, cfg.target_rate)?;
    let filtered = lowpass(&at_rate, cfg.lowpass_cutoff_hz)?;
    let env = envelopes(&filtered, cfg.envelope_cutoff_hz)?;
    let steps = detect_steps(&env, &cfg.peaks);
    let cycles = if steps.is_empty() {
        Vec::new()
    } else {
        match extract_cycles(&filtered, &steps, cfg, origin) {
            Ok(c) => c,
            Err(Error::InsufficientSteps { .. }) => Vec::new(),
            Err(e) => return Err(e),
        }
    };
    Ok(Segmentation { steps, cycles, sample_rate: cfg.target_rate })
}
