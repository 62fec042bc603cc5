//! Peak detection with prominence and minimum-distance constraints, and the
//! pairing of upper/lower envelope peaks into step events.

use serde::{Deserialize, Serialize};

use super::envelope::EnvelopePair;

/// A detected foot strike: an upper-envelope peak aligned with a
/// lower-envelope peak, timed at their midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    pub time_s: f64,
    pub upper_peak_idx: usize,
    pub lower_peak_idx: usize,
}

/// Tunables for step detection. The prominence threshold is relative to the
/// envelope's own amplitude so segmentation is gain-invariant.
#[derive(Debug, Clone, Copy)]
pub struct PeakConfig {
    /// Minimum spacing between retained peaks, seconds. Caps detectable
    /// cadence at 1/min_distance_s steps per second.
    pub min_distance_s: f64,
    /// Peaks must rise at least this fraction of the envelope's 95th
    /// percentile above their surroundings.
    pub relative_prominence: f64,
    /// Maximum |t_upper - t_lower| for a pair to count as one step.
    pub pairing_tolerance_s: f64,
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig {
            min_distance_s: 0.25,
            relative_prominence: 0.2,
            pairing_tolerance_s: 0.1,
        }
    }
}

/// Indices of local maxima of `x` with prominence at least `min_prominence`,
/// thinned so that surviving peaks are at least `min_distance` apart
/// (taller peaks win). Plateaus report their middle sample.
pub fn find_peaks(x: &[f64], min_prominence: f64, min_distance: usize) -> Vec<usize> {
    let n = x.len();
    let mut candidates: Vec<usize> = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            // Scan across any plateau.
            let start = i;
            while i + 1 < n && x[i + 1] == x[i] {
                i += 1;
            }
            if i + 1 < n && x[i + 1] < x[i] {
                candidates.push((start + i) / 2);
            }
        }
        i += 1;
    }

    // Prominence: lowest point on the way to a higher peak (or the edge),
    // on each side; prominence = height - max(left base, right base).
    let mut kept: Vec<usize> = Vec::new();
    for &p in &candidates {
        let h = x[p];
        let mut left_min = h;
        let mut j = p;
        while j > 0 {
            j -= 1;
            if x[j] > h {
                break;
            }
            left_min = left_min.min(x[j]);
        }
        let mut right_min = h;
        let mut j = p;
        while j + 1 < n {
            j += 1;
            if x[j] > h {
                break;
            }
            right_min = right_min.min(x[j]);
        }
        if h - left_min.max(right_min) >= min_prominence {
            kept.push(p);
        }
    }

    // Distance thinning: tallest first.
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.sort_by(|&a, &b| {
        x[kept[b]].partial_cmp(&x[kept[a]]).unwrap().then(kept[a].cmp(&kept[b]))
    });
    let mut alive = vec![true; kept.len()];
    for &oi in &order {
        if !alive[oi] {
            continue;
        }
        for oj in 0..kept.len() {
            if oj != oi && alive[oj] && kept[oj].abs_diff(kept[oi]) < min_distance {
                alive[oj] = false;
            }
        }
    }
    let mut result: Vec<usize> =
        kept.iter().zip(&alive).filter(|(_, &a)| a).map(|(&p, _)| p).collect();
    result.sort_unstable();
    result
}

fn percentile_95(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = 0.95 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Detect steps from a pair of smoothed envelopes.
///
/// Peaks are found independently on the upper envelope and on the flipped
/// lower envelope; an upper peak and a lower peak within the pairing
/// tolerance form one step timed at their midpoint. Unpaired peaks are
/// dropped. An empty result is valid (e.g. a silent clip).
pub fn detect_steps(env: &EnvelopePair, cfg: &PeakConfig) -> Vec<StepEvent> {
    let fs = env.sample_rate as f64;
    let min_distance = (cfg.min_distance_s * fs).round().max(1.0) as usize;

    let flipped_lower: Vec<f64> = env.lower.iter().map(|v| -v).collect();
    let upper_thresh = cfg.relative_prominence * percentile_95(&env.upper);
    let lower_thresh = cfg.relative_prominence * percentile_95(&flipped_lower);
    if upper_thresh <= 0.0 || lower_thresh <= 0.0 {
        return Vec::new();
    }
    let upper_peaks = find_peaks(&env.upper, upper_thresh, min_distance);
    let lower_peaks = find_peaks(&flipped_lower, lower_thresh, min_distance);

    // Nearest-in-time pairing; each lower peak is consumed at most once.
    let tol = (cfg.pairing_tolerance_s * fs).round() as i64;
    let mut used = vec![false; lower_peaks.len()];
    let mut events = Vec::new();
    let mut j0 = 0usize;
    for &up in &upper_peaks {
        while j0 < lower_peaks.len() && (lower_peaks[j0] as i64) < up as i64 - tol {
            j0 += 1;
        }
        let mut best: Option<(usize, i64)> = None;
        let mut j = j0;
        while j < lower_peaks.len() && (lower_peaks[j] as i64) <= up as i64 + tol {
            if !used[j] {
                let d = (lower_peaks[j] as i64 - up as i64).abs();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            j += 1;
        }
        if let Some((j, _)) = best {
            used[j] = true;
            let mid = (up as f64 + lower_peaks[j] as f64) / 2.0;
            events.push(StepEvent {
                time_s: mid / fs,
                upper_peak_idx: up,
                lower_peak_idx: lower_peaks[j],
            });
        }
    }
    events.sort_by(|a, b| a.time_s.partial_cmp(&b.time_s).unwrap());
    events
}
