//! Beat segmentation and the 31-feature heartbeat description.

pub mod fiducials;
pub mod matrix;
pub mod rr;
pub mod segment;
pub mod sveb;
pub mod waveform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fiducials::{detect_fiducials, FiducialPoints};
pub use matrix::{standardize, BeatMeta, FeatureMatrix, Standardizer};
pub use rr::{normalized_pre_rr, rr_features, NormalReference, RrFeatures};
pub use segment::{segment_beats, Heartbeat, POST_R, PRE_R, WINDOW_LEN};
pub use sveb::{assign_sveb_subclasses, kmeans2, split_sveb_classes};
pub use waveform::{energy, max_fourier_coeff, morphology_samples, p_wave_flag, Morphology};

use crate::error::{Error, Result};
use crate::preprocess::PreprocessedRecord;
use crate::wfdb::AamiClass;

/// Sampling rate every feature is computed at.
pub const RATE: f64 = 115.0;

pub const N_FEATURES: usize = 31;

/// Column registry. Every downstream consumer indexes features through this order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "pre_rr",
    "post_rr",
    "avg_rr",
    "local_avg_rr",
    "qrs_dur",
    "qr_dur",
    "rs_dur",
    "t_dur",
    "qrs_morph_0",
    "qrs_morph_1",
    "qrs_morph_2",
    "qrs_morph_3",
    "t_morph_0",
    "t_morph_1",
    "t_morph_2",
    "t_morph_3",
    "t_morph_4",
    "t_morph_5",
    "t_morph_6",
    "t_morph_7",
    "t_morph_8",
    "p_wave_flag",
    "norm_pre_rr",
    "energy_qrs",
    "energy_qr",
    "energy_rs",
    "energy_t",
    "max_fft_qr",
    "max_fft_rs",
    "max_fft_qrs",
    "r_amplitude",
];

pub fn feature_index(name: &str) -> Result<usize> {
    FEATURE_NAMES
        .iter()
        .position(|&n| n == name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown feature `{name}`")))
}

pub fn feature_indices<S: AsRef<str>>(names: &[S]) -> Result<Vec<usize>> {
    names.iter().map(|n| feature_index(n.as_ref())).collect()
}

pub type FeatureVector = [f64; N_FEATURES];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SvebSubclass {
    S1,
    S2,
}

impl fmt::Display for SvebSubclass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SvebSubclass::S1 => "S1",
            SvebSubclass::S2 => "S2",
        })
    }
}

impl FromStr for SvebSubclass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S1" => Ok(SvebSubclass::S1),
            "S2" => Ok(SvebSubclass::S2),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Per-beat quality counters summed over an extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub records: usize,
    pub annotated_beats: usize,
    pub extracted_beats: usize,
    /// Beats without both RR neighbours or whose window leaves the record.
    pub dropped_edge: usize,
    pub qrs_fallback: usize,
    pub t_fallback: usize,
    pub p_window_clipped: usize,
    pub morph_imputed: usize,
}

impl ExtractionReport {
    pub fn merge(&mut self, other: &ExtractionReport) {
        self.records += other.records;
        self.annotated_beats += other.annotated_beats;
        self.extracted_beats += other.extracted_beats;
        self.dropped_edge += other.dropped_edge;
        self.qrs_fallback += other.qrs_fallback;
        self.t_fallback += other.t_fallback;
        self.p_window_clipped += other.p_window_clipped;
        self.morph_imputed += other.morph_imputed;
    }
}

/// Per-beat features that depend only on the beat window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveFeatures {
    pub fiducials: FiducialPoints,
    pub morphology: Morphology,
    pub p_window_clipped: bool,
    pub qrs_dur: f64,
    pub qr_dur: f64,
    pub rs_dur: f64,
    pub t_dur: f64,
    pub energy_qrs: f64,
    pub energy_qr: f64,
    pub energy_rs: f64,
    pub energy_t: f64,
    pub max_fft_qr: f64,
    pub max_fft_rs: f64,
    pub max_fft_qrs: f64,
    pub r_amplitude: f64,
}

pub fn wave_features(window: &[f64]) -> Result<WaveFeatures> {
    let mut f = detect_fiducials(window);
    let (p, clipped) = p_wave_flag(window, &f);
    f.p_detected = p;
    let (q, r, s) = (f.q_onset, f.r_peak, f.s_offset);
    let qr = &window[q..=r];
    let rs = &window[r..=s];
    let qrs = &window[q..=s];
    let qr_dur = (r - q) as f64 / RATE;
    let rs_dur = (s - r) as f64 / RATE;
    Ok(WaveFeatures {
        fiducials: f,
        morphology: morphology_samples(window, &f),
        p_window_clipped: clipped,
        qrs_dur: qr_dur + rs_dur,
        qr_dur,
        rs_dur,
        t_dur: (f.t_offset - f.t_onset) as f64 / RATE,
        energy_qrs: energy(qrs)?,
        energy_qr: energy(qr)?,
        energy_rs: energy(rs)?,
        energy_t: energy(&window[f.t_onset..=f.t_offset])?,
        max_fft_qr: max_fourier_coeff(qr)?,
        max_fft_rs: max_fourier_coeff(rs)?,
        max_fft_qrs: max_fourier_coeff(qrs)?,
        r_amplitude: window[r],
    })
}

pub fn assemble(rr: &RrFeatures, norm_pre_rr: f64, w: &WaveFeatures) -> FeatureVector {
    let m = &w.morphology;
    let mut v = [0.0; N_FEATURES];
    v[..8].copy_from_slice(&[
        rr.pre_rr,
        rr.post_rr,
        rr.avg_rr,
        rr.local_avg_rr,
        w.qrs_dur,
        w.qr_dur,
        w.rs_dur,
        w.t_dur,
    ]);
    v[8..12].copy_from_slice(&m.qrs);
    v[12..21].copy_from_slice(&m.t);
    v[21..].copy_from_slice(&[
        if w.fiducials.p_detected { 1.0 } else { 0.0 },
        norm_pre_rr,
        w.energy_qrs,
        w.energy_qr,
        w.energy_rs,
        w.energy_t,
        w.max_fft_qr,
        w.max_fft_rs,
        w.max_fft_qrs,
        w.r_amplitude,
    ]);
    v
}

/// All feature rows of one preprocessed record.
pub fn extract_record(
    record: &PreprocessedRecord,
    reference: NormalReference,
) -> Result<(FeatureMatrix, ExtractionReport)> {
    let beats = segment_beats(record)?;
    let peaks: Vec<usize> = record.beats.iter().map(|b| b.r_peak).collect();
    let rr: Vec<RrFeatures> = beats.iter().map(|b| rr_features(&peaks, b.beat_index)).collect::<Result<_>>()?;
    let pre: Vec<f64> = rr.iter().map(|r| r.pre_rr).collect();
    let labels: Vec<AamiClass> = beats.iter().map(|b| b.true_class).collect();

    let mut report = ExtractionReport {
        records: 1,
        annotated_beats: record.beats.len(),
        extracted_beats: beats.len(),
        dropped_edge: record.beats.len() - beats.len(),
        ..Default::default()
    };
    let mut out = FeatureMatrix::new();
    for (k, beat) in beats.iter().enumerate() {
        let w = wave_features(&beat.window)?;
        report.qrs_fallback += w.fiducials.qrs_fallback as usize;
        report.t_fallback += w.fiducials.t_fallback as usize;
        report.p_window_clipped += w.p_window_clipped as usize;
        report.morph_imputed += w.morphology.imputed as usize;
        let norm = normalized_pre_rr(&pre, &labels, k, reference);
        out.push(
            BeatMeta {
                record_id: beat.record_id.clone(),
                beat_index: beat.beat_index,
                label: beat.true_class,
                sveb_subclass: None,
            },
            &assemble(&rr[k], norm, &w),
        )?;
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{preprocess_record, FilterSpec};
    use crate::synth::{synthetic_record, SyntheticRecordSpec};

    #[test]
    fn registry_is_unique_and_complete() {
        let mut names = FEATURE_NAMES.to_vec();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), N_FEATURES);
        assert_eq!(feature_index("r_amplitude").unwrap(), 30);
        assert!(feature_index("nope").is_err());
    }

    #[test]
    fn synthetic_record_invariants() {
        let mut spec = SyntheticRecordSpec::new("t1", 5);
        spec.duration_s = 80.0;
        let rec = synthetic_record(&spec).unwrap();
        let pre = preprocess_record(&rec, &FilterSpec::default()).unwrap();
        let (m, report) = extract_record(&pre, NormalReference::Labels).unwrap();
        assert_eq!(m.n_cols(), N_FEATURES);
        assert!(m.n_rows() <= 100 && m.n_rows() > 80);
        assert_eq!(report.extracted_beats + report.dropped_edge, report.annotated_beats);
        let c = |n: &str| feature_index(n).unwrap();
        for i in 0..m.n_rows() {
            let row = m.row(i);
            assert!(row.iter().all(|v| v.is_finite()));
            assert_eq!(row[c("qr_dur")] + row[c("rs_dur")], row[c("qrs_dur")]);
            for d in ["qrs_dur", "qr_dur", "rs_dur", "t_dur", "norm_pre_rr"] {
                assert!(row[c(d)] > 0.0, "{d}");
            }
            for e in ["energy_qrs", "energy_qr", "energy_rs", "energy_t"] {
                assert!(row[c(e)] >= 0.0);
            }
            let r2 = row[c("r_amplitude")].powi(2);
            let lhs = row[c("energy_qr")] + row[c("energy_rs")];
            assert!((lhs - (row[c("energy_qrs")] + r2)).abs() <= 1e-12 * lhs.max(1.0));
        }
    }

    #[test]
    fn identical_beats_have_constant_columns() {
        use crate::preprocess::{PreprocessedRecord, ResampledBeat};
        use crate::synth::{render, BeatTemplate};
        let rate = RATE;
        let times: Vec<f64> = (0..60).map(|k| 0.5 + 0.8 * k as f64).collect();
        let template = BeatTemplate::normal();
        let beats: Vec<(f64, &BeatTemplate)> = times.iter().map(|&t| (t, &template)).collect();
        let signal = render(&beats, rate, (49.0 * rate) as usize);
        let rec = PreprocessedRecord {
            record_id: "flat".into(),
            rate,
            beats: times
                .iter()
                .map(|t| ResampledBeat { r_peak: (t * rate).round() as usize, mit_code: 1, class: AamiClass::N })
                .collect(),
            signal,
        };
        let (m, _) = extract_record(&rec, NormalReference::Proxy).unwrap();
        // R positions round to the 115 Hz grid, so RR varies by a sample; shape columns do not.
        for name in ["energy_qrs", "p_wave_flag", "t_dur", "qrs_dur", "max_fft_qrs"] {
            let j = feature_index(name).unwrap();
            let col = m.column(j);
            let spread = col.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - col.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            assert!(spread < 0.05 * col[0].abs().max(1e-3) + 1e-9, "{name}: {spread}");
        }
    }
}
