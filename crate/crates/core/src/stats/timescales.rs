//! Turning series into timescales: sliding-window RMS thresholds, interference
//! onset, prominence peaks, and the phases of a non-monotone decay.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Window length used for the Θ statistic.
pub const DEFAULT_WINDOW: usize = 10;
/// Reference Θ cutoff.
pub const DEFAULT_THETA: f64 = 5e-4;
/// Minimum height of the interference peak relative to the global maximum.
pub const INTERFERENCE_RELATIVE_HEIGHT: f64 = 1e-3;
/// Normalized height band for interference peaks.
pub const PEAK_BAND: (f64, f64) = (0.0, 0.6);
/// Reference prominence thresholds.
pub const REFERENCE_PROMINENCES: [f64; 3] = [0.0025, 0.05, 0.152];
pub const MEDIAN_WINDOW: usize = 5;

/// Sliding-window RMS deviation; windows of `n + 1` samples centred on each
/// index, shrunk symmetrically at the ends.
pub fn sliding_rms(series: &[f64], n: usize) -> Result<Vec<f64>, StatsError> {
    if series.len() <= n || n == 0 {
        return Err(StatsError::InsufficientData { got: series.len(), need: n + 1 });
    }
    let half = n / 2;
    let len = series.len();
    Ok((0..len)
        .map(|i| {
            let m = half.min(i).min(len - 1 - i);
            let w = &series[i - m..=i + m];
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt()
        })
        .collect())
}

/// First time `theta` drops below `threshold` and stays below for the next
/// `hold` samples (or to the end), linearly interpolated.
pub fn threshold_time(times: &[f64], theta: &[f64], threshold: f64, hold: usize) -> Result<f64, StatsError> {
    if !(threshold > 0.0) {
        return Err(StatsError::InvalidInput(format!("threshold must be positive, got {threshold}")));
    }
    if times.len() != theta.len() {
        return Err(StatsError::GridMismatch { left: times.len(), right: theta.len() });
    }
    let len = theta.len();
    for i in 0..len {
        let end = (i + hold).min(len - 1);
        if theta[i..=end].iter().all(|&v| v < threshold) {
            if i == 0 {
                return Ok(times[0]);
            }
            let (a, b) = (theta[i - 1], theta[i]);
            let f = ((a - threshold) / (a - b)).clamp(0.0, 1.0);
            return Ok(times[i - 1] + f * (times[i] - times[i - 1]));
        }
    }
    Err(StatsError::NeverConverged { threshold })
}

/// First time a series enters `[.., level]` and never leaves it again.
pub fn settling_time(times: &[f64], values: &[f64], level: f64) -> Result<f64, StatsError> {
    if times.len() != values.len() || times.is_empty() {
        return Err(StatsError::GridMismatch { left: times.len(), right: values.len() });
    }
    let Some(last_above) = values.iter().rposition(|&v| v > level) else {
        return Ok(times[0]);
    };
    if last_above + 1 == values.len() {
        return Err(StatsError::NeverConverged { threshold: level });
    }
    let (i, a, b) = (last_above, values[last_above], values[last_above + 1]);
    let f = ((a - level) / (a - b)).clamp(0.0, 1.0);
    Ok(times[i] + f * (times[i + 1] - times[i]))
}

/// Indices of interior local maxima (plateaus report their left end).
fn local_maxima(y: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = y.len();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Whether a density curve shows a significant maximum strictly between its two
/// outermost significant maxima.
pub fn has_interior_peak(density: &[f64], relative_height: f64) -> bool {
    let top = density.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return false;
    }
    local_maxima(density).into_iter().filter(|&i| density[i] >= relative_height * top).count() >= 3
}

/// Earliest time at which a third peak has appeared between the two initial ones.
/// `frames` yields `(t, density on a fixed grid)` in increasing `t`.
pub fn detect_interference_double_slit<I>(frames: I) -> Result<f64, StatsError>
where
    I: IntoIterator<Item = (f64, Vec<f64>)>,
{
    let mut horizon = f64::NAN;
    for (t, density) in frames {
        if has_interior_peak(&density, INTERFERENCE_RELATIVE_HEIGHT) {
            return Ok(t);
        }
        horizon = t;
    }
    Err(StatsError::NoInterference { horizon })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    /// Height after normalizing the curve to unit maximum.
    pub height: f64,
    pub prominence: f64,
}

/// Peaks whose normalized height lies strictly inside `band` and whose
/// prominence exceeds `p`. Prominence is the height above the higher of the
/// lowest points separating the peak from taller terrain on either side.
pub fn detect_peaks_prominence(curve: &[f64], band: (f64, f64), p: f64) -> Vec<Peak> {
    let top = curve.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) || curve.len() < 3 {
        return Vec::new();
    }
    let y: Vec<f64> = curve.iter().map(|v| v / top).collect();
    let mut peaks = Vec::new();
    for i in local_maxima(&y) {
        let h = y[i];
        if !(h > band.0 && h < band.1) {
            continue;
        }
        let mut left = h;
        for k in (0..i).rev() {
            if y[k] > h {
                break;
            }
            left = left.min(y[k]);
        }
        let mut right = h;
        for &v in &y[i + 1..] {
            if v > h {
                break;
            }
            right = right.min(v);
        }
        let prominence = h - left.max(right);
        if prominence > p {
            peaks.push(Peak { index: i, height: h, prominence });
        }
    }
    peaks
}

/// Moving median with a centred window, shrunk at the ends.
pub fn moving_median(y: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..y.len())
        .map(|i| {
            let m = half.min(i).min(y.len() - 1 - i);
            let mut w: Vec<f64> = y[i - m..=i + m].to_vec();
            w.sort_by(f64::total_cmp);
            w[w.len() / 2]
        })
        .collect()
}

/// `(τ₁, τ₂)`: the first local minimum of the median-smoothed log series and
/// the maximum that follows it. A minimum only counts if the series rises by at
/// least `min_rise` (in log units) before falling below it again.
pub fn detect_phase_boundaries(times: &[f64], values: &[f64], min_rise: f64) -> Result<(f64, f64), StatsError> {
    if times.len() != values.len() {
        return Err(StatsError::GridMismatch { left: times.len(), right: values.len() });
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(StatsError::InvalidInput("phase boundaries need a positive series".into()));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let y = moving_median(&logs, MEDIAN_WINDOW);
    let n = y.len();
    for i in 1..n.saturating_sub(1) {
        if !(y[i] < y[i - 1] && y[i] <= y[i + 1]) {
            continue;
        }
        let end = (i + 1..n).find(|&j| y[j] < y[i]).unwrap_or(n);
        let (k, peak) = (i + 1..end).map(|j| (j, y[j])).fold((i, y[i]), |a, b| if b.1 > a.1 { b } else { a });
        if k > i && k + 1 < n && peak - y[i] >= min_rise {
            return Ok((times[i], times[k]));
        }
    }
    Err(StatsError::MonotoneSeries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rms_of_arithmetic_sequence() {
        let s: Vec<f64> = (0..40).map(|i| 0.5 * i as f64).collect();
        let th = sliding_rms(&s, 10).unwrap();
        for v in &th[5..35] {
            assert!((v * v - 10.0 * 0.25).abs() < 1e-12);
        }
        assert_eq!(th[0], 0.0);
        assert!(sliding_rms(&s[..10], 10).is_err());
    }

    #[test]
    fn threshold_cases() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert_eq!(threshold_time(&t, &[0.0; 20], 1e-3, 10).unwrap(), 0.0);
        let rising: Vec<f64> = t.iter().map(|v| v + 1.0).collect();
        assert!(matches!(threshold_time(&t, &rising, 0.5, 10), Err(StatsError::NeverConverged { .. })));
        let falling: Vec<f64> = t.iter().map(|v| 10.0 - v).collect();
        assert!((threshold_time(&t, &falling, 2.5, 10).unwrap() - 7.5).abs() < 1e-12);
        // a transient dip does not count
        let mut dip = vec![1.0; 20];
        dip[3] = 0.0;
        dip[12..].iter_mut().for_each(|v| *v = 0.0);
        assert!((threshold_time(&t, &dip, 0.5, 5).unwrap() - 11.5).abs() < 1e-12);
    }

    #[test]
    fn settling() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert!((settling_time(&t, &[5.0, 1.0, 3.0, 1.0, 0.5], 2.0).unwrap() - 2.5).abs() < 1e-12);
        assert!(settling_time(&t, &[5.0, 1.0, 3.0, 1.0, 2.5], 2.0).is_err());
    }

    #[test]
    fn maxima_and_interior_peaks() {
        assert_eq!(local_maxima(&[0.0, 1.0, 1.0, 0.0, 2.0, 0.0]), vec![1, 4]);
        assert!(!has_interior_peak(&[0.0, 1.0, 0.0, 1.0, 0.0], 1e-3));
        assert!(has_interior_peak(&[0.0, 1.0, 0.0, 0.5, 0.0, 1.0, 0.0], 1e-3));
        assert!(!has_interior_peak(&[0.0, 1.0, 0.0, 1e-4, 0.0, 1.0, 0.0], 1e-3));
    }

    #[test]
    fn single_gaussian_has_no_band_peaks() {
        let y: Vec<f64> = (0..200).map(|i| (-((i as f64 - 100.0) / 20.0).powi(2)).exp()).collect();
        assert!(detect_peaks_prominence(&y, PEAK_BAND, 1e-4).is_empty());
    }

    #[test]
    fn median_smoothing_removes_spikes() {
        let y = [1.0, 1.0, 9.0, 1.0, 1.0];
        assert_eq!(moving_median(&y, 5), vec![1.0; 5]);
    }

    #[test]
    fn monotone_has_no_phases() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.01).collect();
        let v: Vec<f64> = t.iter().map(|x| (-3.0 * x).exp()).collect();
        assert!(matches!(detect_phase_boundaries(&t, &v, 0.0), Err(StatsError::MonotoneSeries)));
    }
}
