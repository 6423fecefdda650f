use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const POWERLINE_HZ: f64 = 60.0;
pub const NOTCH_Q: f64 = 30.0;

/// Second-order IIR section, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Notch centred on `center` Hz with quality factor `q`.
    pub fn notch(center: f64, q: f64, rate: f64) -> Result<Self> {
        if !(center > 0.0 && center < rate / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "notch centre {center} Hz must lie in (0, {}) Hz",
                rate / 2.0
            )));
        }
        if !(q > 0.0) {
            return Err(Error::InvalidParameter(format!("notch Q must be positive, got {q}")));
        }
        let w0 = 2.0 * PI * center / rate;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        let c = -2.0 * w0.cos();
        Ok(Self { b: [1.0 / a0, c / a0, 1.0 / a0], a: [1.0, c / a0, (1.0 - alpha) / a0] })
    }

    /// |H(e^{jw})| at frequency `f`.
    pub fn magnitude(&self, f: f64, rate: f64) -> f64 {
        let w = 2.0 * PI * f / rate;
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * w.cos() + c[2] * (2.0 * w).cos();
            let im = -(c[1] * w.sin() + c[2] * (2.0 * w).sin());
            (re * re + im * im).sqrt()
        };
        eval(&self.b) / eval(&self.a)
    }

    /// Direct form II transposed, state initialized to the steady state of a
    /// constant input equal to the first sample.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let Some(&x0) = x.first() else { return Vec::new() };
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let dc = (b0 + b1 + b2) / (1.0 + a1 + a2);
        let y0 = dc * x0;
        let mut z2 = b2 * x0 - a2 * y0;
        let mut z1 = b1 * x0 - a1 * y0 + z2;
        x.iter()
            .map(|&xi| {
                let y = b0 * xi + z1;
                z1 = b1 * xi - a1 * y + z2;
                z2 = b2 * xi - a2 * y;
                y
            })
            .collect()
    }
}

/// Remove 60 Hz power-line interference. Must run before down-sampling.
pub fn notch_60hz(signal: &[f64], rate: f64) -> Result<Vec<f64>> {
    if !(rate > 2.0 * POWERLINE_HZ) {
        return Err(Error::InvalidParameter(format!(
            "60 Hz notch needs a sampling rate above 120 Hz, got {rate}"
        )));
    }
    Ok(Biquad::notch(POWERLINE_HZ, NOTCH_Q, rate)?.filter(signal))
}
