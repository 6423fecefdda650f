//! Baseline-wander removal, 60 Hz notch, and 360 to 115 Hz resampling.
//!
//! The chain runs in a fixed order: baseline removal and the notch at the
//! native rate, then the anti-aliased resampler. 60 Hz lies above the 57.5 Hz
//! output Nyquist, so the notch cannot run after resampling.

pub mod median;
pub mod notch;
pub mod remap;
pub mod resample;

use serde::{Deserialize, Serialize};

pub use median::{median_filter, running_median, window_samples};
pub use notch::{notch_60hz, Biquad};
pub use remap::{refine_r_peaks, remap_annotations, remap_index, REFINE_RADIUS};
pub use resample::{resample_to_115, ResampleSpec, Resampler};

use crate::error::{Error, Result};
use crate::wfdb::{AamiClass, EcgRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub median_window_1_ms: f64,
    pub median_window_2_ms: f64,
    pub notch_center_hz: f64,
    pub notch_q: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            median_window_1_ms: 200.0,
            median_window_2_ms: 600.0,
            notch_center_hz: notch::POWERLINE_HZ,
            notch_q: notch::NOTCH_Q,
        }
    }
}

/// Baseline estimate: a 200 ms median (strips QRS) followed by a 600 ms
/// median (strips P and T).
pub fn estimate_baseline(signal: &[f64], rate: f64, spec: &FilterSpec) -> Result<Vec<f64>> {
    let first = median_filter(signal, spec.median_window_1_ms, rate)?;
    median_filter(&first, spec.median_window_2_ms, rate)
}

pub fn remove_baseline(signal: &[f64], rate: f64) -> Result<Vec<f64>> {
    remove_baseline_with(signal, rate, &FilterSpec::default())
}

pub fn remove_baseline_with(signal: &[f64], rate: f64, spec: &FilterSpec) -> Result<Vec<f64>> {
    let baseline = estimate_baseline(signal, rate, spec)?;
    Ok(signal.iter().zip(&baseline).map(|(x, b)| x - b).collect())
}

/// Full signal chain for a 360 Hz channel in millivolts.
pub fn preprocess_signal(signal: &[f64], rate: f64, spec: &FilterSpec) -> Result<Vec<f64>> {
    if (rate - resample::SOURCE_RATE).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "the preprocessing chain expects {} Hz input, got {rate} Hz",
            resample::SOURCE_RATE
        )));
    }
    let detrended = remove_baseline_with(signal, rate, spec)?;
    let denoised = Biquad::notch(spec.notch_center_hz, spec.notch_q, rate)?.filter(&detrended);
    resample_to_115(&denoised)
}

/// An annotated beat on the resampled time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampledBeat {
    pub r_peak: usize,
    pub mit_code: u8,
    pub class: AamiClass,
}

/// Channel 0 of a record after the full chain, with beat annotations on the
/// 115 Hz axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedRecord {
    pub record_id: String,
    pub rate: f64,
    pub signal: Vec<f64>,
    pub beats: Vec<ResampledBeat>,
}

pub fn preprocess_record(record: &EcgRecord, spec: &FilterSpec) -> Result<PreprocessedRecord> {
    let raw = record.channel_mv(0);
    let signal = preprocess_signal(&raw, record.sampling_rate(), spec)?;
    let mut labels = record.beat_labels()?;
    // Beats in the final half sample would round past the resampled end.
    let n_out = signal.len() as u64;
    labels.retain(|b| remap_index(b.sample_index, resample::UP, resample::DOWN) < n_out);
    let indices: Vec<u64> = labels.iter().map(|b| b.sample_index).collect();
    let remapped = remap_annotations(&indices, resample::UP, resample::DOWN, signal.len())
        .map_err(|e| Error::Record { record: record.id().to_string(), message: e.to_string() })?;
    let refined = refine_r_peaks(&signal, &remapped, REFINE_RADIUS);
    let beats = labels
        .iter()
        .zip(refined)
        .map(|(l, r_peak)| ResampledBeat { r_peak, mit_code: l.mit_code, class: l.class })
        .collect();
    Ok(PreprocessedRecord {
        record_id: record.id().to_string(),
        rate: resample::TARGET_RATE,
        signal,
        beats,
    })
}
