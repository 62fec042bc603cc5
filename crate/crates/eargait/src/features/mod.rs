//! Per-cycle acoustic features.
//!
//! A gait cycle (4,000 samples at 4 kHz) is framed into 512-sample windows
//! hopped by 128 (Hann), per-frame descriptors are computed, and each block
//! is averaged across frames into one fixed-length vector:
//!
//! | block   | length | per frame                                     |
//! |---------|--------|-----------------------------------------------|
//! | mfcc    | 40     | orthonormal DCT-II of the log-mel spectrum    |
//! | chroma  | 12     | STFT energy folded into pitch classes (A=440) |
//! | mel     | 128    | triangular mel filterbank power, 0-2 kHz      |
//! | rmse    | 1      | root-mean-square of the raw frame             |
//! | tonnetz | 6      | tonal-centroid projection of the chroma       |
//!
//! 187 values per ear; left+right concatenation gives 374. An onset
//! strength sequence is exposed for diagnostics but is not part of the
//! vector.

mod extractor;

pub use extractor::FeatureExtractor;

use serde::{Deserialize, Serialize};

use crate::clip::AudioClip;
use crate::dsp::{GaitCycle, CYCLE_LEN};
use crate::error::{Error, Result};
use crate::fft;

/// Which feature blocks go into the vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    /// mfcc + chroma + mel + rmse + tonnetz (187 per ear).
    All,
    /// mfcc alone (40 per ear).
    Mfcc,
    /// Everything except the tonnetz block (181 per ear); tonnetz dominates
    /// extraction time, so this trades a little accuracy for latency.
    NoTonnetz,
}

impl FeatureMode {
    pub fn blocks(self) -> &'static [(&'static str, usize)] {
        match self {
            FeatureMode::All => {
                &[("mfcc", 40), ("chroma", 12), ("mel", 128), ("rmse", 1), ("tonnetz", 6)]
            }
            FeatureMode::Mfcc => &[("mfcc", 40)],
            FeatureMode::NoTonnetz => {
                &[("mfcc", 40), ("chroma", 12), ("mel", 128), ("rmse", 1)]
            }
        }
    }

    /// Vector length for a single ear.
    pub fn per_ear_len(self) -> usize {
        self.blocks().iter().map(|(_, n)| n).sum()
    }
}

impl std::fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureMode::All => write!(f, "all"),
            FeatureMode::Mfcc => write!(f, "mfcc"),
            FeatureMode::NoTonnetz => write!(f, "no-tonnetz"),
        }
    }
}

/// Which ear(s) a feature vector describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Fused,
}

/// Versioned layout tag carried by feature files and trained models; a
/// classifier refuses vectors whose layout does not match its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub mode: FeatureMode,
    pub side: Side,
}

impl FeatureLayout {
    pub fn len(&self) -> usize {
        let per_ear = self.mode.per_ear_len();
        match self.side {
            Side::Fused => 2 * per_ear,
            _ => per_ear,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::fmt::Display for FeatureLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = match self.side {
            Side::Left => "left",
            Side::Right => "right",
            Side::Fused => "fused",
        };
        write!(f, "{}/{side}/{}", self.mode, self.len())
    }
}

/// A fixed-dimension per-cycle descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: FeatureLayout,
}

fn default_extractor() -> &'static FeatureExtractor {
    static EXTRACTOR: std::sync::OnceLock<FeatureExtractor> = std::sync::OnceLock::new();
    EXTRACTOR.get_or_init(FeatureExtractor::new)
}

fn check_cycle(cycle: &GaitCycle) -> Result<()> {
    if cycle.samples.len() != CYCLE_LEN {
        return Err(Error::Parameter(format!(
            "cycle has {} samples, expected {CYCLE_LEN}",
            cycle.samples.len()
        )));
    }
    Ok(())
}

/// 40 mel-frequency cepstral coefficients, averaged across frames.
pub fn mfcc(cycle: &GaitCycle) -> Result<Vec<f64>> {
    check_cycle(cycle)?;
    Ok(default_extractor().mfcc(&cycle.samples))
}

/// Mean per-pitch-class STFT energy (12 values).
pub fn chroma_stft(cycle: &GaitCycle) -> Result<Vec<f64>> {
    check_cycle(cycle)?;
    Ok(default_extractor().chroma(&cycle.samples))
}

/// Mean per-band mel power (128 values).
pub fn mel_spectrogram(cycle: &GaitCycle) -> Result<Vec<f64>> {
    check_cycle(cycle)?;
    Ok(default_extractor().mel(&cycle.samples))
}

/// Mean frame RMS (1 value).
pub fn rmse(cycle: &GaitCycle) -> Result<f64> {
    check_cycle(cycle)?;
    Ok(default_extractor().rmse(&cycle.samples))
}

/// Mean 6-dimensional tonal centroid of the chroma.
pub fn tonnetz(cycle: &GaitCycle) -> Result<Vec<f64>> {
    check_cycle(cycle)?;
    Ok(default_extractor().tonnetz(&cycle.samples))
}

/// Per-frame onset strength: summed positive first-order differences of the
/// log-mel bands. Diagnostic only; not part of the feature vector.
pub fn onset_strength(cycle: &GaitCycle) -> Result<Vec<f64>> {
    check_cycle(cycle)?;
    Ok(default_extractor().onset_strength(&cycle.samples))
}

/// Build the feature vector for one cycle (or a left/right pair).
///
/// With both ears present the result is the left block followed by the
/// right block; the two cycles must come from the same subject and session
/// and carry the expected side tags.
pub fn featurize(
    left: &GaitCycle,
    right: Option<&GaitCycle>,
    mode: FeatureMode,
) -> Result<FeatureVector> {
    check_cycle(left)?;
    let extractor = default_extractor();
    match right {
        None => Ok(FeatureVector {
            values: extractor.per_ear(&left.samples, mode),
            layout: FeatureLayout {
                mode,
                side: match left.side {
                    crate::clip::Channel::Left => Side::Left,
                    crate::clip::Channel::Right => Side::Right,
                },
            },
        }),
        Some(right) => {
            check_cycle(right)?;
            if !left.same_origin(right) {
                return Err(Error::Pairing(format!(
                    "left cycle is {}/{}, right cycle is {}/{}",
                    left.subject_id, left.session_id, right.subject_id, right.session_id
                )));
            }
            if left.side != crate::clip::Channel::Left || right.side != crate::clip::Channel::Right
            {
                return Err(Error::Pairing(format!(
                    "expected (left, right) cycles, got ({}, {})",
                    left.side, right.side
                )));
            }
            let mut values = extractor.per_ear(&left.samples, mode);
            values.extend(extractor.per_ear(&right.samples, mode));
            Ok(FeatureVector { values, layout: FeatureLayout { mode, side: Side::Fused } })
        }
    }
}

/// Fraction of spectral energy strictly below `cutoff_hz`, DC excluded from
/// both numerator and denominator.
pub fn energy_ratio_below(clip: &AudioClip, cutoff_hz: f64) -> Result<f64> {
    if clip.is_empty() {
        return Err(Error::Parameter("clip is empty".into()));
    }
    let ps = fft::power_spectrum(&clip.samples);
    let n = clip.samples.len();
    let fs = clip.sample_rate as f64;
    let mut below = 0.0;
    let mut total = 0.0;
    for (k, &p) in ps.iter().enumerate().skip(1) {
        let f = k as f64 * fs / n as f64;
        total += p;
        if f < cutoff_hz {
            below += p;
        }
    }
    if total <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(below / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::Channel;
    use rand::{Rng, SeedableRng};

    fn cycle_from(samples: Vec<f64>, side: Channel) -> GaitCycle {
        GaitCycle {
            samples,
            duration_s: 1.0,
            subject_id: "s0".into(),
            session_id: "sess0".into(),
            side,
        }
    }

    fn sine_cycle(freq: f64, amp: f64) -> GaitCycle {
        let samples = (0..CYCLE_LEN)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 4000.0).sin())
            .collect();
        cycle_from(samples, Channel::Left)
    }

    fn noise_cycle(seed: u64, amp: f64) -> GaitCycle {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..CYCLE_LEN).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
        cycle_from(samples, Channel::Left)
    }

    #[test]
    fn mfcc_is_deterministic() {
        let c = sine_cycle(8.0, 0.5);
        assert_eq!(mfcc(&c).unwrap(), mfcc(&c).unwrap());
    }

    #[test]
    fn mfcc_gain_shifts_only_first_coefficient() {
        let base = noise_cycle(11, 0.3);
        let mut scaled = base.clone();
        for v in &mut scaled.samples {
            *v *= 3.0;
        }
        let a = mfcc(&base).unwrap();
        let b = mfcc(&scaled).unwrap();
        assert!((a[0] - b[0]).abs() > 1e-6, "coefficient 0 should move");
        for k in 1..40 {
            assert!((a[k] - b[k]).abs() < 1e-9, "coefficient {k} moved by {}", a[k] - b[k]);
        }
    }

    #[test]
    fn noise_and_sine_are_distinguishable() {
        let a = mfcc(&noise_cycle(1, 0.5)).unwrap();
        let b = mfcc(&sine_cycle(8.0, 0.5)).unwrap();
        let dist: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        assert!(dist > 1.0, "L2 distance {dist}");
    }

    #[test]
    fn rmse_of_zero_cycle_is_zero() {
        let c = cycle_from(vec![0.0; CYCLE_LEN], Channel::Left);
        assert_eq!(rmse(&c).unwrap(), 0.0);
    }

    #[test]
    fn rmse_of_constant_cycle() {
        let c = cycle_from(vec![0.5; CYCLE_LEN], Channel::Left);
        let r = rmse(&c).unwrap();
        assert!((r - 0.5).abs() < 0.005, "rmse {r}");
    }

    #[test]
    fn mel_peak_tracks_tone() {
        let c = sine_cycle(30.0, 0.8);
        let mel = mel_spectrogram(&c).unwrap();
        assert_eq!(mel.len(), 128);
        let peak = mel.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
        let center = FeatureExtractor::new().mel_band_center_hz(peak);
        assert!((center - 30.0).abs() < 10.0, "peak band centered at {center} Hz");
    }

    #[test]
    fn per_ear_lengths() {
        let c = noise_cycle(2, 0.4);
        assert_eq!(featurize(&c, None, FeatureMode::All).unwrap().values.len(), 187);
        assert_eq!(featurize(&c, None, FeatureMode::Mfcc).unwrap().values.len(), 40);
        assert_eq!(featurize(&c, None, FeatureMode::NoTonnetz).unwrap().values.len(), 181);
    }

    #[test]
    fn fused_vector_prefixes_left() {
        let left = noise_cycle(3, 0.4);
        let mut right = noise_cycle(4, 0.4);
        right.side = Channel::Right;
        let alone = featurize(&left, None, FeatureMode::All).unwrap();
        let fused = featurize(&left, Some(&right), FeatureMode::All).unwrap();
        assert_eq!(fused.values.len(), 374);
        assert_eq!(&fused.values[..187], &alone.values[..]);
        assert_eq!(fused.layout.side, Side::Fused);

        let mfcc_fused = featurize(&left, Some(&right), FeatureMode::Mfcc).unwrap();
        assert_eq!(mfcc_fused.values.len(), 80);
    }

    #[test]
    fn no_tonnetz_is_a_prefix_of_all() {
        let c = noise_cycle(5, 0.4);
        let all = featurize(&c, None, FeatureMode::All).unwrap();
        let trimmed = featurize(&c, None, FeatureMode::NoTonnetz).unwrap();
        assert_eq!(&all.values[..181], &trimmed.values[..]);
    }

    #[test]
    fn mismatched_provenance_rejected() {
        let left = noise_cycle(6, 0.4);
        let mut right = noise_cycle(7, 0.4);
        right.side = Channel::Right;
        right.session_id = "other".into();
        assert!(matches!(
            featurize(&left, Some(&right), FeatureMode::All),
            Err(Error::Pairing(_))
        ));
    }

    #[test]
    fn wrong_side_tags_rejected() {
        let left = noise_cycle(8, 0.4);
        let right = noise_cycle(9, 0.4); // still tagged Left
        assert!(matches!(
            featurize(&left, Some(&right), FeatureMode::All),
            Err(Error::Pairing(_))
        ));
    }

    #[test]
    fn energy_ratio_single_tones() {
        let low = AudioClip::new(sine_cycle(10.0, 1.0).samples, 4000, Channel::Left).unwrap();
        assert!(energy_ratio_below(&low, 50.0).unwrap() >= 0.99);
        let high = AudioClip::new(sine_cycle(440.0, 1.0).samples, 4000, Channel::Left).unwrap();
        assert!(energy_ratio_below(&high, 50.0).unwrap() <= 0.01);
    }

    #[test]
    fn energy_ratio_rejects_silence() {
        let clip = AudioClip::new(vec![0.0; 4000], 4000, Channel::Left).unwrap();
        assert!(matches!(energy_ratio_below(&clip, 50.0), Err(Error::UndefinedRatio)));
    }
}
