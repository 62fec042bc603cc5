//! Natural cubic spline resampling.

/// Resample `y` to `new_len` points with a natural cubic spline over the
/// uniform knots `0..y.len()-1`. Endpoints are reproduced exactly.
pub fn resample(y: &[f64], new_len: usize) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 2, "need at least two samples to resample");
    assert!(new_len >= 2, "need at least two output samples");

    let m = second_derivatives(y);
    let scale = (n - 1) as f64 / (new_len - 1) as f64;
    (0..new_len)
        .map(|j| {
            let x = j as f64 * scale;
            let i = (x.floor() as usize).min(n - 2);
            let t = x - i as f64;
            let omt = 1.0 - t;
            m[i] * omt * omt * omt / 6.0
                + m[i + 1] * t * t * t / 6.0
                + (y[i] - m[i] / 6.0) * omt
                + (y[i + 1] - m[i + 1] / 6.0) * t
        })
        .collect()
}

/// Second derivatives of the natural spline (zero at both ends), by the
/// Thomas algorithm on the tridiagonal system with unit knot spacing.
fn second_derivatives(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let interior = n - 2;
    let mut diag = vec![4.0; interior];
    let mut rhs: Vec<f64> = (1..n - 1).map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1])).collect();

    for i in 1..interior {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    m[interior] = rhs[interior - 1] / diag[interior - 1];
    for i in (0..interior - 1).rev() {
        m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let y: Vec<f64> = (0..3800).map(|i| ((i as f64) * 0.013).sin() * 0.4 + 0.1).collect();
        let out = resample(&y, 4000);
        assert_eq!(out.len(), 4000);
        assert!((out[0] - y[0]).abs() < 1e-12);
        assert!((out[3999] - y[3799]).abs() < 1e-12);
    }

    #[test]
    fn linear_data_is_reproduced() {
        let y: Vec<f64> = (0..100).map(|i| 0.5 + 0.01 * i as f64).collect();
        let out = resample(&y, 257);
        for (j, &v) in out.iter().enumerate() {
            let x = j as f64 * 99.0 / 256.0;
            assert!((v - (0.5 + 0.01 * x)).abs() < 1e-10);
        }
    }

    #[test]
    fn sine_resampled_matches_analytic() {
        // One gait-cycle-like case: an 8 Hz sine sampled at 4 kHz for ~0.95 s,
        // stretched to 4000 samples.
        let fs = 4000.0;
        let n_raw = 3800;
        let y: Vec<f64> =
            (0..n_raw).map(|i| (2.0 * std::f64::consts::PI * 8.0 * i as f64 / fs).sin()).collect();
        let out = resample(&y, 4000);
        let mut err_sq = 0.0;
        for (j, &v) in out.iter().enumerate() {
            let x = j as f64 * (n_raw - 1) as f64 / 3999.0;
            let truth = (2.0 * std::f64::consts::PI * 8.0 * x / fs).sin();
            err_sq += (v - truth) * (v - truth);
        }
        let rms_err = (err_sq / 4000.0).sqrt();
        assert!(rms_err < 1e-3, "rms error {rms_err}");
    }
}
