//! Rational resampling through a polyphase Kaiser-windowed FIR.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SOURCE_RATE: f64 = 360.0;
pub const TARGET_RATE: f64 = 115.0;
pub const UP: usize = 23;
pub const DOWN: usize = 72;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleSpec {
    pub up: usize,
    pub down: usize,
    pub source_rate: f64,
    /// Passband edge in Hz.
    pub passband: f64,
    /// Start of the stopband in Hz; at most the output Nyquist frequency.
    pub stopband: f64,
    /// Stopband attenuation in dB.
    pub attenuation_db: f64,
}

impl ResampleSpec {
    /// 360 Hz to 115 Hz, 60 dB stopband from the 57.5 Hz output Nyquist.
    pub fn mitbih() -> Self {
        Self {
            up: UP,
            down: DOWN,
            source_rate: SOURCE_RATE,
            passband: 45.0,
            stopband: 57.5,
            attenuation_db: 60.0,
        }
    }

    pub fn target_rate(&self) -> f64 {
        self.source_rate * self.up as f64 / self.down as f64
    }

    pub fn cutoff(&self) -> f64 {
        0.5 * (self.passband + self.stopband)
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser_beta(attenuation_db: f64) -> f64 {
    if attenuation_db > 50.0 {
        0.1102 * (attenuation_db - 8.7)
    } else if attenuation_db >= 21.0 {
        0.5842 * (attenuation_db - 21.0).powf(0.4) + 0.07886 * (attenuation_db - 21.0)
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct Resampler {
    spec: ResampleSpec,
    taps: Vec<f64>,
}

impl Resampler {
    pub fn new(spec: ResampleSpec) -> Result<Self> {
        if spec.up == 0 || spec.down == 0 {
            return Err(Error::InvalidParameter("resampling factors must be positive".into()));
        }
        let fs_up = spec.source_rate * spec.up as f64;
        let nyquist_out = spec.target_rate().min(spec.source_rate) / 2.0;
        if !(spec.passband > 0.0 && spec.passband < spec.stopband && spec.stopband <= nyquist_out + 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "anti-alias band {}..{} Hz must lie below {nyquist_out} Hz",
                spec.passband, spec.stopband
            )));
        }
        let transition = 2.0 * PI * (spec.stopband - spec.passband) / fs_up;
        let mut len = ((spec.attenuation_db - 7.95) / (2.285 * transition)).ceil() as usize + 1;
        if len % 2 == 0 {
            len += 1;
        }
        let beta = kaiser_beta(spec.attenuation_db);
        let fc = spec.cutoff() / fs_up;
        let mid = (len - 1) as f64 / 2.0;
        let i0_beta = bessel_i0(beta);
        let mut taps: Vec<f64> = (0..len)
            .map(|n| {
                let t = n as f64 - mid;
                let sinc = if t == 0.0 { 2.0 * fc } else { (2.0 * PI * fc * t).sin() / (PI * t) };
                let r = t / mid;
                let window = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
                sinc * window
            })
            .collect();
        let gain = spec.up as f64 / taps.iter().sum::<f64>();
        taps.iter_mut().for_each(|t| *t *= gain);
        Ok(Self { spec, taps })
    }

    pub fn spec(&self) -> &ResampleSpec {
        &self.spec
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn output_len(&self, n: usize) -> usize {
        (n * self.spec.up).div_ceil(self.spec.down)
    }

    /// Resample with group delay removed: output sample `m` is aligned with
    /// input time `m * down / up`. Edges are extended with the boundary value.
    pub fn process(&self, signal: &[f64]) -> Result<Vec<f64>> {
        if signal.is_empty() {
            return Err(Error::InvalidInput("cannot resample an empty signal".into()));
        }
        let up = self.spec.up as isize;
        let down = self.spec.down as isize;
        let n = signal.len() as isize;
        let len = self.taps.len() as isize;
        let delay = (len - 1) / 2;
        let out_len = self.output_len(signal.len());
        let mut out = Vec::with_capacity(out_len);
        for m in 0..out_len as isize {
            let p = m * down + delay;
            // Input sample i contributes through tap k = p - up * i, 0 <= k < len.
            let i_max = p.div_euclid(up);
            let i_min = (p - len + 1 + up - 1).div_euclid(up);
            let mut acc = 0.0;
            for i in i_min..=i_max {
                let k = p - up * i;
                let x = signal[i.clamp(0, n - 1) as usize];
                acc += self.taps[k as usize] * x;
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Resample a 360 Hz signal to exactly 115 Hz.
pub fn resample_to_115(signal: &[f64]) -> Result<Vec<f64>> {
    Resampler::new(ResampleSpec::mitbih())?.process(signal)
}
