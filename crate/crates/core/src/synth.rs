//! Synthetic ECG with known structure: sums of Gaussian waves per beat class,
//! plus baseline drift, power-line hum and white noise. Used by tests, the
//! `synth` CLI verb and offline smoke runs of the full pipeline.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::wfdb::{write_record, AamiClass, AnnotationEvent, EcgRecord, RecordHeader, SignalSpec};

/// One Gaussian wave: amplitude (mV), centre relative to R (s), width sigma (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
}

impl Wave {
    pub const fn new(amplitude: f64, center: f64, sigma: f64) -> Self {
        Self { amplitude, center, sigma }
    }

    pub fn value(&self, t: f64) -> f64 {
        let z = (t - self.center) / self.sigma;
        self.amplitude * (-0.5 * z * z).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatTemplate {
    pub waves: Vec<Wave>,
}

impl BeatTemplate {
    pub fn value(&self, t: f64) -> f64 {
        self.waves.iter().map(|w| w.value(t)).sum()
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            waves: self
                .waves
                .iter()
                .map(|w| Wave { amplitude: w.amplitude * gain, ..*w })
                .collect(),
        }
    }

    /// Textbook normal beat.
    pub fn normal() -> Self {
        Self {
            waves: vec![
                Wave::new(0.15, -0.20, 0.025),
                Wave::new(-0.10, -0.035, 0.010),
                Wave::new(1.20, 0.0, 0.012),
                Wave::new(-0.25, 0.035, 0.010),
                Wave::new(0.30, 0.26, 0.045),
            ],
        }
    }

    /// Supraventricular premature beat, pattern 1: early, flattened P.
    pub fn sveb_flat_p() -> Self {
        Self {
            waves: vec![
                Wave::new(0.04, -0.16, 0.020),
                Wave::new(-0.10, -0.035, 0.010),
                Wave::new(1.15, 0.0, 0.012),
                Wave::new(-0.25, 0.035, 0.010),
                Wave::new(0.28, 0.25, 0.045),
            ],
        }
    }

    /// Supraventricular premature beat, pattern 2: inverted P, taller T.
    pub fn sveb_inverted_p() -> Self {
        Self {
            waves: vec![
                Wave::new(-0.10, -0.14, 0.020),
                Wave::new(-0.08, -0.035, 0.010),
                Wave::new(1.00, 0.0, 0.013),
                Wave::new(-0.30, 0.035, 0.010),
                Wave::new(0.45, 0.24, 0.040),
            ],
        }
    }

    /// Ventricular ectopic beat: no P, wide QRS, discordant T.
    pub fn ventricular() -> Self {
        Self {
            waves: vec![
                Wave::new(1.00, 0.0, 0.030),
                Wave::new(-0.70, 0.075, 0.030),
                Wave::new(-0.45, 0.32, 0.060),
            ],
        }
    }

    pub fn fusion() -> Self {
        let n = Self::normal().scaled(0.5);
        let v = Self::ventricular().scaled(0.5);
        Self { waves: n.waves.into_iter().chain(v.waves).collect() }
    }

    pub fn paced() -> Self {
        Self {
            waves: vec![
                Wave::new(0.6, -0.04, 0.003),
                Wave::new(0.9, 0.0, 0.035),
                Wave::new(-0.4, 0.08, 0.030),
                Wave::new(0.25, 0.30, 0.060),
            ],
        }
    }
}

/// Render beats (R times in seconds) into a signal of `n` samples.
pub fn render(beats: &[(f64, &BeatTemplate)], rate: f64, n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (r, tpl) in beats {
        // Every wave is negligible beyond 0.6 s from R.
        let lo = ((r - 0.6) * rate).floor().max(0.0) as usize;
        let hi = (((r + 0.8) * rate).ceil() as usize).min(n);
        for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
            *v += tpl.value(i as f64 / rate - r);
        }
    }
    x
}

/// Regular train of normal beats, R-peaks at `first, first + rr, ...` up to `duration`.
pub fn normal_train(rate: f64, duration: f64, rr: f64, first: f64) -> (Vec<f64>, Vec<f64>) {
    let tpl = BeatTemplate::normal();
    let n = (duration * rate).round() as usize;
    let mut times = Vec::new();
    let mut t = first;
    while t < duration {
        times.push(t);
        t += rr;
    }
    let beats: Vec<(f64, &BeatTemplate)> = times.iter().map(|&t| (t, &tpl)).collect();
    (render(&beats, rate, n), times)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecordSpec {
    pub record_id: String,
    pub duration_s: f64,
    pub mean_rr_s: f64,
    /// Probabilities of S, V, F and Q beats; the rest are N.
    pub ectopy: [f64; 4],
    /// Fraction of S beats drawn from the inverted-P pattern.
    pub sveb_pattern_2: f64,
    pub drift_mv: f64,
    pub powerline_mv: f64,
    pub noise_mv: f64,
    pub seed: u64,
}

impl SyntheticRecordSpec {
    pub fn new(record_id: impl Into<String>, seed: u64) -> Self {
        Self {
            record_id: record_id.into(),
            duration_s: 120.0,
            mean_rr_s: 0.8,
            ectopy: [0.06, 0.08, 0.01, 0.005],
            sveb_pattern_2: 0.3,
            drift_mv: 0.3,
            powerline_mv: 0.05,
            noise_mv: 0.01,
            seed,
        }
    }
}

const RATE: f64 = 360.0;
const GAIN: f64 = 200.0;
const ZERO: i32 = 1024;

/// Generate a two-channel 360 Hz record with MIT-style annotations.
pub fn synthetic_record(spec: &SyntheticRecordSpec) -> Result<EcgRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Patient-level variation in amplitude and heart rate.
    let amp = rng.random_range(0.8..1.2);
    let mean_rr = spec.mean_rr_s * rng.random_range(0.9..1.1);
    let templates = [
        BeatTemplate::normal().scaled(amp),
        BeatTemplate::sveb_flat_p().scaled(amp),
        BeatTemplate::sveb_inverted_p().scaled(amp),
        BeatTemplate::ventricular().scaled(amp),
        BeatTemplate::fusion().scaled(amp),
        BeatTemplate::paced().scaled(amp),
    ];

    let jitter = Normal::new(0.0, 0.03).expect("valid sigma");
    let mut adjusted: Vec<(f64, usize, AamiClass)> = Vec::new();
    let mut t = 0.5 + rng.random_range(0.0..mean_rr);
    let mut prev: Option<(AamiClass, f64)> = None;
    loop {
        let u: f64 = rng.random();
        let [ps, pv, pf, pq] = spec.ectopy;
        let class = if u < ps {
            AamiClass::S
        } else if u < ps + pv {
            AamiClass::V
        } else if u < ps + pv + pf {
            AamiClass::F
        } else if u < ps + pv + pf + pq {
            AamiClass::Q
        } else {
            AamiClass::N
        };
        let tpl = match class {
            AamiClass::N => 0,
            AamiClass::S if rng.random::<f64>() < spec.sveb_pattern_2 => 2,
            AamiClass::S => 1,
            AamiClass::V => 3,
            AamiClass::F => 4,
            AamiClass::Q => 5,
        };
        if let Some((prev_class, prev_rr)) = prev {
            let prematurity = match class {
                AamiClass::S => 0.62,
                AamiClass::V => 0.68,
                AamiClass::F => 0.9,
                _ => 1.0,
            };
            let mut rr = mean_rr * (1.0 + jitter.sample(&mut rng)) * prematurity;
            if prev_class == AamiClass::V {
                // Compensatory pause: the two intervals around a V sum to two cycles.
                rr = rr.max(2.0 * mean_rr - prev_rr);
            }
            t += rr.max(0.3);
            prev = Some((class, rr.max(0.3)));
        } else {
            prev = Some((class, mean_rr));
        }
        if t >= spec.duration_s - 0.5 {
            break;
        }
        adjusted.push((t, tpl, class));
    }

    let n = (spec.duration_s * RATE).round() as usize;
    let rendered: Vec<(f64, &BeatTemplate)> =
        adjusted.iter().map(|&(bt, tpl, _)| (bt, &templates[tpl])).collect();
    let mut x = render(&rendered, RATE, n);
    let noise = Normal::new(0.0, spec.noise_mv.max(1e-12)).expect("valid sigma");
    let drift_phase: f64 = rng.random_range(0.0..2.0 * PI);
    let hum_phase: f64 = rng.random_range(0.0..2.0 * PI);
    for (i, v) in x.iter_mut().enumerate() {
        let ts = i as f64 / RATE;
        *v += spec.drift_mv * (2.0 * PI * 0.25 * ts + drift_phase).sin()
            + 0.5 * spec.drift_mv * (2.0 * PI * 0.07 * ts).sin()
            + spec.powerline_mv * (2.0 * PI * 60.0 * ts + hum_phase).sin()
            + noise.sample(&mut rng);
    }
    let quantize = |mv: f64| ((mv * GAIN).round() as i32 + ZERO).clamp(0, 2047) as i16;
    let ch0: Vec<i16> = x.iter().map(|&v| quantize(v)).collect();
    let ch1: Vec<i16> = x.iter().map(|&v| quantize(0.4 * v)).collect();

    let mut annotations = Vec::with_capacity(adjusted.len() + 1);
    let mut rhythm = AnnotationEvent::new(0, 28)?;
    rhythm.aux = Some("(N".into());
    annotations.push(rhythm);
    let mut last_index = 0u64;
    for &(bt, tpl, class) in &adjusted {
        let code = match class {
            AamiClass::N => 1,
            AamiClass::S if tpl == 2 => 4,
            AamiClass::S => 8,
            AamiClass::V => 5,
            AamiClass::F => 6,
            AamiClass::Q => 13,
        };
        let idx = ((bt * RATE).round() as u64).max(last_index + 1);
        if idx as usize >= n {
            break;
        }
        annotations.push(AnnotationEvent::new(idx, code)?);
        last_index = idx;
    }

    let signal = |name: &str| SignalSpec {
        file_name: format!("{}.dat", spec.record_id),
        format_code: 212,
        adc_gain: GAIN,
        baseline: ZERO,
        units: "mV".into(),
        adc_resolution: 11,
        adc_zero: ZERO,
        init_value: 0,
        checksum: 0,
        block_size: 0,
        lead_name: name.into(),
    };
    let header = RecordHeader {
        record_id: spec.record_id.clone(),
        n_signals: 2,
        sampling_rate: RATE,
        n_samples: n,
        signals: vec![signal("MLII"), signal("V1")],
        comments: vec!["synthetic".into()],
    };
    EcgRecord::new(header, vec![ch0, ch1], annotations)
}

/// Write synthetic records for `ids` into `dir`. Record `k` uses seed `seed + k`.
pub fn write_synthetic_database(
    dir: &Path,
    ids: &[&str],
    seed: u64,
    duration_s: f64,
) -> Result<()> {
    for (k, id) in ids.iter().enumerate() {
        let mut spec = SyntheticRecordSpec::new(*id, seed.wrapping_add(k as u64));
        spec.duration_s = duration_s;
        write_record(dir, &synthetic_record(&spec)?, "atr")?;
    }
    Ok(())
}
