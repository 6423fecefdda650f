use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::fiducials::FiducialPoints;
use super::segment::ms;
use crate::error::{Error, Result};

pub const T_MORPH_POINTS: usize = 9;
/// Height of the P bump over the pre-QRS median, in mV.
pub const P_THRESHOLD_MV: f64 = 0.06;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Morphology {
    /// Amplitudes at r-2, r-1, r+1, r+2.
    pub qrs: [f64; 4],
    pub t: [f64; T_MORPH_POINTS],
    /// Some sample fell outside the window and was imputed as 0.
    pub imputed: bool,
}

pub fn morphology_samples(window: &[f64], f: &FiducialPoints) -> Morphology {
    let mut imputed = false;
    let mut at = |i: isize| {
        if i < 0 || i as usize >= window.len() {
            imputed = true;
            0.0
        } else {
            window[i as usize]
        }
    };
    let r = f.r_peak as isize;
    let qrs = [at(r - 2), at(r - 1), at(r + 1), at(r + 2)];

    let (a, b) = (f.t_onset as f64, f.t_offset as f64);
    let mut t = [0.0; T_MORPH_POINTS];
    for (k, slot) in t.iter_mut().enumerate() {
        let pos = a + (b - a) * k as f64 / (T_MORPH_POINTS - 1) as f64;
        let i = pos.floor();
        let frac = pos - i;
        let lo = at(i as isize);
        *slot = if frac == 0.0 { lo } else { lo + frac * (at(i as isize + 1) - lo) };
    }
    Morphology { qrs, t, imputed }
}

/// Sum of squared amplitudes.
pub fn energy(segment: &[f64]) -> Result<f64> {
    if segment.is_empty() {
        return Err(Error::InvalidInput("energy of an empty segment".into()));
    }
    Ok(segment.iter().map(|v| v * v).sum())
}

/// Largest non-DC DFT magnitude of the segment zero-padded to a power of two.
pub fn max_fourier_coeff(segment: &[f64]) -> Result<f64> {
    if segment.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "Fourier maximum needs at least 2 samples, got {}",
            segment.len()
        )));
    }
    let n = segment.len().next_power_of_two();
    let mut buf: Vec<Complex<f64>> = segment.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf[1..].iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// P-wave presence in the window 200 ms to 40 ms before QRS onset, clipped to
/// the beat window. Returns the flag and whether the search window was cut
/// short by the window start.
pub fn p_wave_flag(window: &[f64], f: &FiducialPoints) -> (bool, bool) {
    let end = match f.q_onset.checked_sub(ms(40.0)) {
        Some(e) => e,
        None => return (false, true),
    };
    let wanted_start = f.q_onset as isize - ms(200.0) as isize;
    let clipped = wanted_start < 0;
    let start = wanted_start.max(0) as usize;
    if end < start + 2 {
        return (false, true);
    }
    let mut seg = window[start..=end].to_vec();
    let max = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    seg.sort_by(f64::total_cmp);
    let m = seg.len() / 2;
    let median = if seg.len() % 2 == 1 { seg[m] } else { 0.5 * (seg[m - 1] + seg[m]) };
    (max - median >= P_THRESHOLD_MV, clipped)
}
