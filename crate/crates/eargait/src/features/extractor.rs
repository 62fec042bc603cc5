//! Frame-level spectral machinery behind the feature operations.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::FeatureMode;

pub(crate) const SAMPLE_RATE: f64 = 4000.0;
pub(crate) const FRAME_LEN: usize = 512;
pub(crate) const HOP: usize = 128;
pub(crate) const N_MELS: usize = 128;
pub(crate) const N_MFCC: usize = 40;
const FMAX: f64 = SAMPLE_RATE / 2.0;
/// Power floor applied before taking logs, so silent frames stay finite.
const LOG_FLOOR: f64 = 1e-10;
const A4_HZ: f64 = 440.0;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Precomputed window, FFT plan, filterbank, DCT matrix, and chroma/tonnetz
/// projections. Build once, reuse across cycles; all methods are pure.
pub struct FeatureExtractor {
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    /// Sparse mel filters: per band, (first bin, weights).
    mel_bank: Vec<(usize, Vec<f64>)>,
    mel_centers_hz: Vec<f64>,
    /// Orthonormal DCT-II, N_MFCC x N_MELS row-major.
    dct: Vec<f64>,
    /// Pitch class of each positive FFT bin (bin 1..=FRAME_LEN/2).
    pitch_class: Vec<usize>,
    /// 6 x 12 tonal-centroid projection.
    tonnetz_basis: [[f64; 12]; 6],
}

impl Default for FeatureExtractor {
    fn default() -> Self {
        Self::new()
    }
}

impl FeatureExtractor {
    pub fn new() -> Self {
        let window: Vec<f64> = (0..FRAME_LEN)
            .map(|i| {
                0.5 * (1.0
                    - (2.0 * std::f64::consts::PI * i as f64 / FRAME_LEN as f64).cos())
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(FRAME_LEN);

        // Triangular filters with unit peaks, equally spaced on the mel scale.
        let mel_max = hz_to_mel(FMAX);
        let edges: Vec<f64> =
            (0..N_MELS + 2).map(|i| mel_to_hz(i as f64 * mel_max / (N_MELS + 1) as f64)).collect();
        let bin_hz = SAMPLE_RATE / FRAME_LEN as f64;
        let n_bins = FRAME_LEN / 2 + 1;
        let mut mel_bank = Vec::with_capacity(N_MELS);
        for k in 0..N_MELS {
            let (lo, mid, hi) = (edges[k], edges[k + 1], edges[k + 2]);
            let mut first = None;
            let mut weights = Vec::new();
            for b in 0..n_bins {
                let f = b as f64 * bin_hz;
                let w = if f <= lo || f >= hi {
                    0.0
                } else if f <= mid {
                    (f - lo) / (mid - lo)
                } else {
                    (hi - f) / (hi - mid)
                };
                if w > 0.0 {
                    if first.is_none() {
                        first = Some(b);
                    }
                    weights.push(w);
                } else if first.is_some() {
                    break;
                }
            }
            mel_bank.push((first.unwrap_or(0), weights));
        }
        let mel_centers_hz = (0..N_MELS).map(|k| edges[k + 1]).collect();

        let mut dct = vec![0.0; N_MFCC * N_MELS];
        for k in 0..N_MFCC {
            let scale = if k == 0 {
                (1.0 / N_MELS as f64).sqrt()
            } else {
                (2.0 / N_MELS as f64).sqrt()
            };
            for j in 0..N_MELS {
                dct[k * N_MELS + j] = scale
                    * (std::f64::consts::PI * k as f64 * (2 * j + 1) as f64
                        / (2.0 * N_MELS as f64))
                        .cos();
            }
        }

        let pitch_class: Vec<usize> = (1..=FRAME_LEN / 2)
            .map(|b| {
                let f = b as f64 * bin_hz;
                let midi = 69.0 + 12.0 * (f / A4_HZ).log2();
                midi.round().rem_euclid(12.0) as usize
            })
            .collect();

        let mut tonnetz_basis = [[0.0; 12]; 6];
        for l in 0..12 {
            let lf = l as f64;
            let fifths = lf * 7.0 * std::f64::consts::PI / 6.0;
            let minor3 = lf * 3.0 * std::f64::consts::PI / 2.0;
            let major3 = lf * 2.0 * std::f64::consts::PI / 3.0;
            tonnetz_basis[0][l] = fifths.sin();
            tonnetz_basis[1][l] = fifths.cos();
            tonnetz_basis[2][l] = minor3.sin();
            tonnetz_basis[3][l] = minor3.cos();
            tonnetz_basis[4][l] = 0.5 * major3.sin();
            tonnetz_basis[5][l] = 0.5 * major3.cos();
        }

        FeatureExtractor { window, fft, mel_bank, mel_centers_hz, dct, pitch_class, tonnetz_basis }
    }

    /// Center frequency (Hz) of a mel band, for diagnostics and tests.
    pub fn mel_band_center_hz(&self, band: usize) -> f64 {
        self.mel_centers_hz[band]
    }

    fn frame_starts(&self, n: usize) -> impl Iterator<Item = usize> {
        (0..=n.saturating_sub(FRAME_LEN)).step_by(HOP)
    }

    /// One-sided power spectrum of each Hann-windowed frame.
    fn frame_power_spectra(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut spectra = Vec::new();
        let mut buf = vec![Complex64::new(0.0, 0.0); FRAME_LEN];
        for start in self.frame_starts(x.len()) {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(x[start + i] * self.window[i], 0.0);
            }
            self.fft.process(&mut buf);
            spectra.push(buf[..=FRAME_LEN / 2].iter().map(|c| c.norm_sqr()).collect());
        }
        spectra
    }

    fn mel_frame(&self, ps: &[f64]) -> Vec<f64> {
        self.mel_bank
            .iter()
            .map(|(first, weights)| {
                weights.iter().enumerate().map(|(i, w)| w * ps[first + i]).sum()
            })
            .collect()
    }

    fn log_mel_frames(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.frame_power_spectra(x)
            .iter()
            .map(|ps| self.mel_frame(ps).iter().map(|&p| p.max(LOG_FLOOR).ln()).collect())
            .collect()
    }

    fn chroma_frame(&self, ps: &[f64]) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (b, &pc) in self.pitch_class.iter().enumerate() {
            out[pc] += ps[b + 1];
        }
        out
    }

    fn mean_over_frames(frames: Vec<Vec<f64>>) -> Vec<f64> {
        let n = frames.len();
        assert!(n > 0);
        let dim = frames[0].len();
        let mut mean = vec![0.0; dim];
        for f in &frames {
            for (m, v) in mean.iter_mut().zip(f) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        mean
    }

    pub fn mfcc(&self, x: &[f64]) -> Vec<f64> {
        let coeffs: Vec<Vec<f64>> = self
            .log_mel_frames(x)
            .iter()
            .map(|lm| {
                (0..N_MFCC)
                    .map(|k| {
                        self.dct[k * N_MELS..(k + 1) * N_MELS]
                            .iter()
                            .zip(lm)
                            .map(|(d, v)| d * v)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Self::mean_over_frames(coeffs)
    }

    pub fn mel(&self, x: &[f64]) -> Vec<f64> {
        let frames: Vec<Vec<f64>> =
            self.frame_power_spectra(x).iter().map(|ps| self.mel_frame(ps)).collect();
        Self::mean_over_frames(frames)
    }

    pub fn chroma(&self, x: &[f64]) -> Vec<f64> {
        let frames: Vec<Vec<f64>> = self
            .frame_power_spectra(x)
            .iter()
            .map(|ps| self.chroma_frame(ps).to_vec())
            .collect();
        Self::mean_over_frames(frames)
    }

    pub fn rmse(&self, x: &[f64]) -> f64 {
        let mut frames = 0usize;
        let mut acc = 0.0;
        for start in self.frame_starts(x.len()) {
            let frame = &x[start..start + FRAME_LEN];
            let ms: f64 = frame.iter().map(|v| v * v).sum::<f64>() / FRAME_LEN as f64;
            acc += ms.sqrt();
            frames += 1;
        }
        acc / frames as f64
    }

    pub fn tonnetz(&self, x: &[f64]) -> Vec<f64> {
        let frames: Vec<Vec<f64>> = self
            .frame_power_spectra(x)
            .iter()
            .map(|ps| {
                let chroma = self.chroma_frame(ps);
                let total: f64 = chroma.iter().sum();
                let mut t = vec![0.0; 6];
                if total > 0.0 {
                    for (ti, basis) in t.iter_mut().zip(&self.tonnetz_basis) {
                        *ti = chroma
                            .iter()
                            .zip(basis)
                            .map(|(c, b)| c / total * b)
                            .sum();
                    }
                }
                t
            })
            .collect();
        Self::mean_over_frames(frames)
    }

    pub fn onset_strength(&self, x: &[f64]) -> Vec<f64> {
        let log_mel = self.log_mel_frames(x);
        let mut out = vec![0.0; log_mel.len()];
        for i in 1..log_mel.len() {
            out[i] = log_mel[i]
                .iter()
                .zip(&log_mel[i - 1])
                .map(|(cur, prev)| (cur - prev).max(0.0))
                .sum();
        }
        out
    }

    /// Assemble the per-ear vector for a mode, reusing the frame spectra
    /// across blocks.
    pub fn per_ear(&self, x: &[f64], mode: FeatureMode) -> Vec<f64> {
        let spectra = self.frame_power_spectra(x);
        let n_frames = spectra.len() as f64;

        let mut mel_mean = vec![0.0; N_MELS];
        let mut mfcc_mean = vec![0.0; N_MFCC];
        let mut chroma_mean = [0.0; 12];
        let mut tonnetz_mean = vec![0.0; 6];
        for ps in &spectra {
            let mel = self.mel_frame(ps);
            let log_mel: Vec<f64> = mel.iter().map(|&p| p.max(LOG_FLOOR).ln()).collect();
            for k in 0..N_MFCC {
                mfcc_mean[k] += self.dct[k * N_MELS..(k + 1) * N_MELS]
                    .iter()
                    .zip(&log_mel)
                    .map(|(d, v)| d * v)
                    .sum::<f64>();
            }
            if mode == FeatureMode::Mfcc {
                continue;
            }
            for (m, v) in mel_mean.iter_mut().zip(&mel) {
                *m += v;
            }
            let chroma = self.chroma_frame(ps);
            for (c, v) in chroma_mean.iter_mut().zip(&chroma) {
                *c += v;
            }
            if mode == FeatureMode::All {
                let total: f64 = chroma.iter().sum();
                if total > 0.0 {
                    for (t, basis) in tonnetz_mean.iter_mut().zip(&self.tonnetz_basis) {
                        *t += chroma
                            .iter()
                            .zip(basis)
                            .map(|(c, b)| c / total * b)
                            .sum::<f64>();
                    }
                }
            }
        }
        for v in mfcc_mean
            .iter_mut()
            .chain(mel_mean.iter_mut())
            .chain(chroma_mean.iter_mut())
            .chain(tonnetz_mean.iter_mut())
        {
            *v /= n_frames;
        }

        let mut out = mfcc_mean;
        if mode == FeatureMode::Mfcc {
            return out;
        }
        out.extend_from_slice(&chroma_mean);
        out.extend(mel_mean);
        out.push(self.rmse(x));
        if mode == FeatureMode::All {
            out.extend(tonnetz_mean);
        }
        out
    }
}
