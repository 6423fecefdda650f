use crate::error::{Error, Result};

/// Odd window length in samples for a duration at a given rate.
pub fn window_samples(window_ms: f64, rate: f64) -> usize {
    let n = (window_ms * rate / 1000.0).round().max(1.0) as usize;
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

/// Reflect an out-of-range index back into `0..len` (mirror without
/// repeating the edge sample).
fn reflect(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= len as isize {
        m = period - m;
    }
    m as usize
}

/// Centered running median with reflection padding.
pub fn median_filter(signal: &[f64], window_ms: f64, rate: f64) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::InvalidInput("median filter of an empty signal".into()));
    }
    if !(window_ms >= 1.0) || !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "median window {window_ms} ms at {rate} Hz"
        )));
    }
    Ok(running_median(signal, window_samples(window_ms, rate)))
}

/// Running median over an odd window of `width` samples.
pub fn running_median(signal: &[f64], width: usize) -> Vec<f64> {
    debug_assert!(width % 2 == 1);
    let n = signal.len();
    let half = (width / 2) as isize;
    let at = |i: isize| signal[reflect(i, n)];

    let mut window: Vec<f64> = (-half..=half).map(at).collect();
    window.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(n);
    out.push(window[width / 2]);
    for i in 1..n as isize {
        let leaving = at(i - 1 - half);
        let entering = at(i + half);
        let pos = window
            .binary_search_by(|v| v.total_cmp(&leaving))
            .expect("leaving sample is in the window");
        window.remove(pos);
        let ins = window.partition_point(|v| v.total_cmp(&entering).is_lt());
        window.insert(ins, entering);
        out.push(window[width / 2]);
    }
    out
}
