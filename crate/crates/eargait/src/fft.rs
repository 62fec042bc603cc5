//! Thin wrappers around rustfft shared by the DSP and feature stages.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward FFT of a real signal, returned as a full complex spectrum.
pub fn fft_real(signal: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// In-place inverse FFT, normalized by 1/N (rustfft leaves it unscaled).
pub fn ifft(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Magnitude of the analytic signal (instantaneous envelope) computed with
/// the FFT method: zero negative frequencies, double positive ones, keep DC
/// and Nyquist, inverse-transform, take the modulus.
pub fn analytic_magnitude(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let mut spec = fft_real(signal);
    let half = n / 2;
    for (k, v) in spec.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // DC and Nyquist stay as-is.
        } else if k < half || (n % 2 == 1 && k == half) {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut spec);
    spec.iter().map(|c| c.norm()).collect()
}

/// One-sided power spectrum of a real signal: bins `0..=n/2`, each the
/// squared magnitude of the DFT coefficient.
pub fn power_spectrum(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let spec = fft_real(signal);
    spec[..=n / 2].iter().map(|c| c.norm_sqr()).collect()
}
