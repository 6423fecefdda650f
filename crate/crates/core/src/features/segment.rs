use serde::{Deserialize, Serialize};

use super::{SvebSubclass, RATE};
use crate::error::{Error, Result};
use crate::preprocess::PreprocessedRecord;
use crate::wfdb::AamiClass;

/// Samples kept before the R-peak (0.25 s at 115 Hz).
pub const PRE_R: usize = 29;
/// Samples kept after the R-peak (0.45 s at 115 Hz).
pub const POST_R: usize = 52;
pub const WINDOW_LEN: usize = PRE_R + POST_R + 1;

/// Samples for a duration in milliseconds at the feature rate, rounded.
pub(crate) fn ms(duration_ms: f64) -> usize {
    (duration_ms * RATE / 1000.0).round() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heartbeat {
    pub record_id: String,
    /// Position of the beat among all beat annotations of its record.
    pub beat_index: usize,
    /// R-peak on the 115 Hz axis of the whole record.
    pub r_peak: usize,
    /// Signal from `r_peak - PRE_R` to `r_peak + POST_R` inclusive, in mV.
    pub window: Vec<f64>,
    pub true_class: AamiClass,
    pub sveb_subclass: Option<SvebSubclass>,
}

impl Heartbeat {
    /// Index of the R-peak inside `window`.
    pub fn r(&self) -> usize {
        PRE_R
    }
}

/// Cut one window per annotated beat. The first and last beats have no
/// neighbouring RR interval and are dropped, as is any beat whose window
/// would leave the record.
pub fn segment_beats(record: &PreprocessedRecord) -> Result<Vec<Heartbeat>> {
    let n = record.beats.len();
    if n < 3 {
        return Err(Error::Record {
            record: record.record_id.clone(),
            message: format!("{n} beats; at least 3 are needed for RR features"),
        });
    }
    let len = record.signal.len();
    let mut out = Vec::with_capacity(n - 2);
    for (i, b) in record.beats.iter().enumerate().take(n - 1).skip(1) {
        if b.r_peak < PRE_R || b.r_peak + POST_R >= len {
            continue;
        }
        out.push(Heartbeat {
            record_id: record.record_id.clone(),
            beat_index: i,
            r_peak: b.r_peak,
            window: record.signal[b.r_peak - PRE_R..=b.r_peak + POST_R].to_vec(),
            true_class: b.class,
            sveb_subclass: None,
        });
    }
    Ok(out)
}
