use serde::{Deserialize, Serialize};

use super::RATE;
use crate::error::{Error, Result};
use crate::wfdb::AamiClass;

/// RR intervals averaged for `local_avg_rr`.
pub const LOCAL_RR_BEATS: usize = 10;
/// Beats before and after the current one in the normalisation neighbourhood.
pub const NEIGHBOURHOOD_BEFORE: usize = 15;
pub const NEIGHBOURHOOD_AFTER: usize = 14;
/// Half-width of the band around the median that stands in for normal beats.
pub const PROXY_BAND: f64 = 0.20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrFeatures {
    pub pre_rr: f64,
    pub post_rr: f64,
    pub avg_rr: f64,
    pub local_avg_rr: f64,
}

/// RR features of beat `i` from the R-peaks of every beat in the record.
pub fn rr_features(r_peaks: &[usize], i: usize) -> Result<RrFeatures> {
    let n = r_peaks.len();
    if i == 0 || i + 1 >= n {
        return Err(Error::InvalidInput(format!("beat {i} of {n} has no RR interval on both sides")));
    }
    let interval = |k: usize| (r_peaks[k] - r_peaks[k - 1]) as f64 / RATE;
    let first = i.saturating_sub(LOCAL_RR_BEATS - 1).max(1);
    let local: f64 = (first..=i).map(interval).sum::<f64>() / (i - first + 1) as f64;
    Ok(RrFeatures {
        pre_rr: interval(i),
        post_rr: interval(i + 1),
        avg_rr: (r_peaks[n - 1] - r_peaks[0]) as f64 / RATE / (n - 1) as f64,
        local_avg_rr: local,
    })
}

/// How the normal-beat reference for `norm_pre_rr` is found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalReference {
    /// Use the beats labelled N.
    Labels,
    /// Use the beats whose pre-RR lies within 20% of the neighbourhood median.
    Proxy,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

fn proxy_reference(pre_rr: &[f64]) -> f64 {
    let m = median(&mut pre_rr.to_vec());
    let near: Vec<f64> = pre_rr.iter().copied().filter(|v| (v - m).abs() <= PROXY_BAND * m).collect();
    if near.is_empty() {
        m
    } else {
        near.iter().sum::<f64>() / near.len() as f64
    }
}

/// Pre-RR of beat `i` divided by the mean pre-RR of normal beats among the
/// 30 beats around it. Label mode falls back to the proxy when the
/// neighbourhood has no N beat.
pub fn normalized_pre_rr(
    pre_rr: &[f64],
    labels: &[AamiClass],
    i: usize,
    reference: NormalReference,
) -> f64 {
    let lo = i.saturating_sub(NEIGHBOURHOOD_BEFORE);
    let hi = (i + NEIGHBOURHOOD_AFTER).min(pre_rr.len() - 1);
    let window = &pre_rr[lo..=hi];
    let denominator = match reference {
        NormalReference::Labels => {
            let normal: Vec<f64> = (lo..=hi).filter(|&k| labels[k] == AamiClass::N).map(|k| pre_rr[k]).collect();
            if normal.is_empty() {
                proxy_reference(window)
            } else {
                normal.iter().sum::<f64>() / normal.len() as f64
            }
        }
        NormalReference::Proxy => proxy_reference(window),
    };
    pre_rr[i] / denominator
}
