//! QRS and T boundaries by slope and amplitude thresholds.

use serde::{Deserialize, Serialize};

use super::segment::{ms, PRE_R, WINDOW_LEN};

/// Fraction of the largest slope near R below which the signal counts as flat.
pub const SLOPE_FRACTION: f64 = 0.05;
/// Consecutive flat differences that end the QRS scan.
pub const SUSTAIN: usize = 3;
/// Fraction of the T peak that marks T onset and offset.
pub const T_FRACTION: f64 = 0.10;

/// Window-relative fiducial indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiducialPoints {
    pub q_onset: usize,
    pub r_peak: usize,
    pub s_offset: usize,
    pub t_onset: usize,
    pub t_offset: usize,
    pub p_detected: bool,
    /// QRS boundaries came from the fixed offsets.
    pub qrs_fallback: bool,
    /// T boundaries came from the T window edges.
    pub t_fallback: bool,
}

impl FiducialPoints {
    pub fn is_ordered(&self) -> bool {
        self.q_onset < self.r_peak
            && self.r_peak < self.s_offset
            && self.s_offset <= self.t_onset
            && self.t_onset < self.t_offset
    }
}

/// Detect fiducials in a beat window whose R-peak sits at `PRE_R`. The P flag
/// is left unset; see [`super::p_wave_flag`].
pub fn detect_fiducials(window: &[f64]) -> FiducialPoints {
    debug_assert_eq!(window.len(), WINDOW_LEN);
    let r = PRE_R;
    let n = window.len();
    let reach = ms(100.0);
    let fallback = ms(60.0);
    let diff = |k: usize| (window[k + 1] - window[k]).abs();

    let lo = r - reach;
    let hi = (r + reach).min(n - 2);
    let max_slope = (lo..=hi).map(diff).fold(0.0, f64::max);
    let threshold = SLOPE_FRACTION * max_slope;

    let mut q = None;
    let mut s = None;
    if max_slope > 0.0 {
        // diff(j) spans samples j and j + 1; a flat run ending at j puts the onset at j + 1.
        q = (lo + SUSTAIN - 1..=r - 2)
            .rev()
            .find(|&j| (0..SUSTAIN).all(|k| diff(j - k) < threshold))
            .map(|j| j + 1);
        s = (r + 1..=hi).find(|&i| (0..SUSTAIN).all(|k| diff(i + k) < threshold));
    }
    let qrs_fallback = q.is_none() || s.is_none();
    let q_onset = q.unwrap_or(r - fallback);
    let s_offset = s.unwrap_or(r + fallback);

    let tw_start = s_offset + ms(60.0);
    let tw_end = (s_offset + ms(360.0)).min(n - 1);
    let (t_onset, t_offset, t_fallback) = t_boundaries(window, tw_start, tw_end);

    FiducialPoints {
        q_onset,
        r_peak: r,
        s_offset,
        t_onset,
        t_offset,
        p_detected: false,
        qrs_fallback,
        t_fallback,
    }
}

/// T onset and offset: the samples nearest the T peak, on either side, whose
/// magnitude falls below 10% of the peak. Bounded by the window.
fn t_boundaries(x: &[f64], start: usize, end: usize) -> (usize, usize, bool) {
    let peak = (start..=end).fold(start, |best, i| if x[i].abs() > x[best].abs() { i } else { best });
    let height = x[peak].abs();
    if height == 0.0 {
        return (start, end, true);
    }
    let level = T_FRACTION * height;
    let onset = (start..peak).rev().find(|&i| x[i].abs() < level).unwrap_or(start);
    let offset = (peak + 1..=end).find(|&i| x[i].abs() < level).unwrap_or(end);
    if onset < offset {
        (onset, offset, false)
    } else {
        (start, end, true)
    }
}
