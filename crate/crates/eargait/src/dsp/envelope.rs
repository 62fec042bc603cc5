//! Hilbert-transform envelopes of the filtered gait signal.

use crate::clip::AudioClip;
use crate::error::{Error, Result};
use crate::fft;

use super::filter;

/// Smoothed upper and lower envelopes of a clip, same length as the source.
///
/// The lower envelope is the mirror image of the upper one, so
/// `upper[i] >= 0 >= lower[i]` everywhere and the pair of a negated signal
/// swaps roles exactly: `upper(-x) == -lower(x)`.
#[derive(Debug, Clone)]
pub struct EnvelopePair {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub sample_rate: u32,
}

/// Extract the envelope pair of a (already lowpass-filtered) clip.
///
/// The instantaneous magnitude of the analytic signal is smoothed with a
/// zero-phase Butterworth lowpass at `smoothing_cutoff_hz` (3 Hz in the
/// standard pipeline — low enough to flatten the strike's oscillation,
/// high enough to keep the per-step bumps apart).
pub fn envelopes(clip: &AudioClip, smoothing_cutoff_hz: f64) -> Result<EnvelopePair> {
    if clip.duration_s() < 1.0 {
        return Err(Error::InsufficientData(format!(
            "clip of {:.3} s is too short for envelope extraction (need >= 1 s)",
            clip.duration_s()
        )));
    }
    let magnitude = fft::analytic_magnitude(&clip.samples);
    let sections = filter::butterworth_lowpass(4, smoothing_cutoff_hz, clip.sample_rate as f64);
    let pad = (3.0 * clip.sample_rate as f64 / smoothing_cutoff_hz).ceil() as usize;
    let smoothed = filter::filtfilt(&sections, &magnitude, pad);

    // Clamp filter undershoot so the envelopes never cross.
    let upper: Vec<f64> = smoothed.iter().map(|&v| v.max(0.0)).collect();
    let lower: Vec<f64> = upper.iter().map(|&v| -v).collect();
    Ok(EnvelopePair { upper, lower, sample_rate: clip.sample_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::Channel;

    #[test]
    fn zero_clip_gives_zero_envelopes() {
        let clip = AudioClip::new(vec![0.0; 8000], 4000, Channel::Left).unwrap();
        let env = envelopes(&clip, 3.0).unwrap();
        assert!(env.upper.iter().all(|&v| v == 0.0));
        assert!(env.lower.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_clip_rejected() {
        let clip = AudioClip::new(vec![0.1; 2000], 4000, Channel::Left).unwrap();
        assert!(matches!(envelopes(&clip, 3.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn am_modulator_recovered() {
        // 20 Hz carrier modulated by a 1 Hz raised cosine; the upper envelope
        // must track the modulator.
        let fs = 4000.0;
        let n = 16_000;
        let mut x = Vec::with_capacity(n);
        let mut truth = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / fs;
            let m = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * 1.0 * t).cos());
            truth.push(m);
            x.push(m * (2.0 * std::f64::consts::PI * 20.0 * t).sin());
        }
        let clip = AudioClip::new(x, 4000, Channel::Left).unwrap();
        let env = envelopes(&clip, 3.0).unwrap();
        // Skip half a modulator period at each edge.
        let (a, b) = (2000, n - 2000);
        let err: f64 = env.upper[a..b]
            .iter()
            .zip(&truth[a..b])
            .map(|(e, m)| (e - m) * (e - m))
            .sum::<f64>()
            / (b - a) as f64;
        let signal: f64 =
            truth[a..b].iter().map(|m| m * m).sum::<f64>() / (b - a) as f64;
        let rel_rms = (err / signal).sqrt();
        assert!(rel_rms < 0.05, "modulator recovery error {rel_rms}");
    }

    #[test]
    fn negated_signal_swaps_envelopes() {
        let fs = 4000u32;
        let n = 8000;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs as f64;
                (2.0 * std::f64::consts::PI * 15.0 * t).sin()
                    * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * 0.8 * t).sin())
                    + 0.1 * (2.0 * std::f64::consts::PI * 7.0 * t).cos()
            })
            .collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let env_pos = envelopes(&AudioClip::new(x, fs, Channel::Left).unwrap(), 3.0).unwrap();
        let env_neg = envelopes(&AudioClip::new(neg, fs, Channel::Left).unwrap(), 3.0).unwrap();
        for (u, l) in env_neg.upper.iter().zip(&env_pos.lower) {
            assert!((u + l).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_never_below_lower() {
        let fs = 4000u32;
        let x: Vec<f64> = (0..12_000)
            .map(|i| {
                let t = i as f64 / fs as f64;
                ((2.0 * std::f64::consts::PI * 25.0 * t).sin() * (-3.0 * (t % 0.5)).exp()).abs()
                    - 0.2
            })
            .collect();
        let env = envelopes(&AudioClip::new(x, fs, Channel::Left).unwrap(), 3.0).unwrap();
        for (u, l) in env.upper.iter().zip(&env.lower) {
            assert!(u >= l);
        }
    }
}
